import { StudioApp } from "./app.js";

function boot(): void {
  const app = new StudioApp(document);
  void app.resume();
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}
