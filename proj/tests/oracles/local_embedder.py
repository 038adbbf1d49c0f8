# Copyright 2026 The QCG-Rerank Authors
# SPDX-License-Identifier: Apache-2.0
"""Standalone reimplementation of the local 3-gram hashing embedder.

Prints C++ initializers for the frozen values in tests/unit/test_embed.cpp.
Inputs are ASCII, so NFC and case folding reduce to str.strip().lower().
"""

import math

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
MASK = (1 << 64) - 1


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def embed(text: str, dim: int) -> list:
    t = text.strip().lower()
    grams = [t] if len(t) < 3 else [t[i:i + 3] for i in range(len(t) - 2)]
    v = [0.0] * dim
    for g in grams:
        h = fnv1a(g.encode())
        v[h % dim] += -1.0 if h >> 63 else 1.0
    n = math.sqrt(sum(x * x for x in v))
    if n == 0:
        v = [0.0] * dim
        v[fnv1a(t.encode()) % dim] = 1.0
        return v
    return [x / n for x in v]


def cos(a, b):
    return sum(x * y for x, y in zip(a, b))


def main():
    words = ["apple", "zebra", "mountain", "river", "guilin", "museum"]
    for i, a in enumerate(words):
        for b in words[i + 1:]:
            print(f'  {{"{a}", "{b}", {cos(embed(a, 256), embed(b, 256))!r}, '
                  f'{cos(embed(a, 16), embed(b, 16))!r}}},')
    print("sentences:")
    print(repr(cos(embed("The Louvre museum in Paris", 64), embed("museum of Paris", 64))))
    v = embed("abc", 8)
    print("abc@8:", [repr(x) for x in v])
    print("ab@8:", [repr(x) for x in embed("ab", 8)])


if __name__ == "__main__":
    main()
