"""Independent oracle values frozen into the C++ tests.

Run with: python3 tests/oracles/compute_oracles.py
Uses only the Python standard library (hashlib, brute force search).
"""
import hashlib

ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"


def b58encode(data: bytes) -> str:
    n = int.from_bytes(data, "big")
    out = ""
    while n:
        n, r = divmod(n, 58)
        out = ALPHABET[r] + out
    pad = len(data) - len(data.lstrip(b"\0"))
    return "1" * pad + out


def b58decode(text: str) -> bytes:
    n = 0
    for ch in text:
        n = n * 58 + ALPHABET.index(ch)
    pad = len(text) - len(text.lstrip("1"))
    body = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    return b"\0" * pad + body


def cid_of(content: bytes) -> str:
    return b58encode(b"\x12\x20" + hashlib.sha256(content).digest())


def brute_force_line(points, p):
    hits = [(a, b) for a in range(p) for b in range(p)
            if all((a + b * x) % p == y for x, y in points)]
    return hits


if __name__ == "__main__":
    print("line through (2,10),(5,3) mod 97:", brute_force_line([(2, 10), (5, 3)], 97))
    real = "Qmc8N5wtMkvMySqxu4Agy2SGv" + "L2zxYGf4rWmHvMASoUQv6"
    raw = b58decode(real)
    print("real cid:", real, len(real))
    print("real multihash:", raw.hex(), len(raw))
    print("real value:", int.from_bytes(raw[2:], "big"))
    print("b58([0]):", b58encode(b"\0"))
    print("zero cid:", b58encode(b"\x12\x20" + bytes(32)))
    for s in [b"hello", b"", b"noop"]:
        print(repr(s), hashlib.sha256(s).hexdigest(), cid_of(s))
