"""Model-size bookkeeping: variable and constraint counts for the three
formulations across grid sizes, matching their closed-form totals.
"""

from gridcover import GridSpec, build_milp_cov, build_milp_mov, build_milp_static, instance_stats


def main():
    print(f"{'model':<12} {'grid':<8} {'params':<14} {'binary':>7} {'cont.':>7} {'rows':>7}")
    for side in (8, 10, 12):
        grid = GridSpec(side, side)
        cells = sorted(grid.cells())
        for n_static in (5, 10):
            s = instance_stats(build_milp_static(grid, n_static).instance)
            print(f"{'placement':<12} {side}x{side:<6} N_s={n_static:<10} "
                  f"{s.n_binary:>7} {s.n_continuous:>7} {s.n_constraints:>7}")
        for (l, k) in ((3, 4), (5, 4)):
            s = instance_stats(build_milp_cov(grid, cells, l, k).instance)
            print(f"{'coverage':<12} {side}x{side:<6} L={l}, K={k:<7} "
                  f"{s.n_binary:>7} {s.n_continuous:>7} {s.n_constraints:>7}")
            s = instance_stats(build_milp_mov(grid, cells, 0, l, k, coverage_target=1).instance)
            print(f"{'movement':<12} {side}x{side:<6} L={l}, K={k:<7} "
                  f"{s.n_binary:>7} {s.n_continuous:>7} {s.n_constraints:>7}")

    C, L, K, NS = 100, 3, 4, 5
    print("\nclosed forms at 10x10:")
    print(f"  placement: N_s|C| binaries, N_s|C| continuous, N_s+(N_s+1)|C| rows "
          f"-> {NS*C}, {NS*C}, {NS+(NS+1)*C}")
    print(f"  coverage:  LK|C| binaries, (1+LK)|C| continuous, LK(3|C|+1)+|C|(2-L) rows "
          f"-> {L*K*C}, {(1+L*K)*C}, {L*K*(3*C+1)+C*(2-L)}")
    print(f"  movement:  same sizes, one extra row "
          f"-> {L*K*C}, {(1+L*K)*C}, {L*K*(3*C+1)+C*(2-L)+1}")


if __name__ == "__main__":
    main()
