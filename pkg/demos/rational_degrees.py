"""Big Ramsey degrees of finite chains in the rationals.

Counts similarity types of diagonal antichains coding an n-element chain and
prints the count at each depth of the schedule.
"""
from bigramsey.degrees import big_ramsey_degree
from bigramsey.fraisse import FiniteStructure, template_by_name


def chain(q, n):
    return FiniteStructure.build(q.signature, (0,) * n, [("<", i, j) for i in range(n) for j in range(i + 1, n)])


def main():
    q = template_by_name("q")
    for n in (1, 2, 3):
        res = big_ramsey_degree(chain(q, n), q)
        print(f"chain of size {n}")
        print(res.trace_text())
        print()


if __name__ == "__main__":
    main()
