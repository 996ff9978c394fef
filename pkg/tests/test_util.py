from vscript.util import Splitmix64, fnv1a64, mix64, new_ulid, normalize_ws


def test_splitmix64_reference_vectors():
    # Published outputs for the zero seed.
    rng = Splitmix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4
    assert rng.next_u64() == 0x06C45D188009454F


def test_fnv1a64_reference_vectors():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_splitmix64_determinism_and_bounds():
    a = Splitmix64(1234)
    b = Splitmix64(1234)
    seq_a = [a.next_u64() for _ in range(50)]
    seq_b = [b.next_u64() for _ in range(50)]
    assert seq_a == seq_b
    assert all(0 <= x < 2**64 for x in seq_a)
    c = Splitmix64(1234)
    assert all(0.0 <= c.next_float() < 1.0 for _ in range(100))
    d = Splitmix64(99)
    assert all(0 <= d.next_below(7) < 7 for _ in range(100))


def test_mix64_is_order_and_type_sensitive():
    assert mix64(1, "a") != mix64("a", 1)
    assert mix64("ab") != mix64("a", "b")
    assert mix64(12) != mix64("12")
    assert mix64(7, "x") == mix64(7, "x")


def test_ulid_shape_and_sortability():
    a = new_ulid(timestamp_ms=1_000, entropy=5)
    b = new_ulid(timestamp_ms=2_000, entropy=1)
    assert len(a) == len(b) == 26
    assert a < b  # timestamp-major ordering
    assert new_ulid(timestamp_ms=1_000, entropy=5) == a
    assert len({new_ulid() for _ in range(100)}) == 100


def test_normalize_ws():
    assert normalize_ws("  a \t b\n\nc ") == "a b c"
    assert normalize_ws("") == ""
