"""Which shifts extend continuously to the empty-word boundary.

Run: python3 demos/extendability.py
"""

from gcms.dynamics import Extendable, empty_words, extension_verdict
from gcms.matrix import ce1, ce2, ce3, full_shift, lazy_renewal, n_renewal, pair_renewal, prime_renewal, renewal


def main():
    for A in [renewal(), lazy_renewal(), pair_renewal(), n_renewal(3), full_shift(), ce1(), ce2(), ce3(), prime_renewal()]:
        v = extension_verdict(A)
        print(f"{str(A):16s} {type(v).__name__}")
        if isinstance(v, Extendable):
            for xi in empty_words(A):
                print(f"    {xi}  ->  {v.empty_word_dynamics[xi]}")
        else:
            w = v.witness
            print(f"    {w.reason}")
            print(f"    first family:  limit {w.first.limit}, shifted limit {w.first.shift_limit}")
            if w.second is not None:
                print(f"    second family: limit {w.second.limit}, shifted limit {w.second.shift_limit}")


if __name__ == "__main__":
    main()
