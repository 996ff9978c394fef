// The service serialises writers per session; the client mirrors that by
// chaining steer requests so a second rapid steer waits for the first.
export class SteerQueue {
  private chain: Promise<unknown> = Promise.resolve();
  private depth = 0;

  get pending(): number {
    return this.depth;
  }

  enqueue<T>(task: () => Promise<T>): Promise<T> {
    this.depth += 1;
    const run = () => task();
    const next = this.chain.then(run, run);
    this.chain = next.then(
      () => {
        this.depth -= 1;
      },
      () => {
        this.depth -= 1;
      },
    );
    return next;
  }
}
