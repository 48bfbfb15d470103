"""Small benchmark sweep over generator difficulty knobs.

Two knobs control difficulty: p_c adds direct label-to-label edges (a label
ends up inside another label's boundary), p_m gives boundary members
information-equivalent twins (several boundaries fit the same data). Each
grid cell draws fresh networks, runs every algorithm on identical samples,
and scores recovered shared/private variables against the generator's truth.

Desk-scale settings so the sweep finishes in a few seconds; raise n_seeds
and the grid for smoother numbers.
"""

from clcd import GenConfig, render_benchmark_csv, run_benchmark


def main():
    template = GenConfig(n_labels=4, n_features=30, n_samples=3000,
                         mb_size_range=(3, 4), seed=12)
    rows, _ = run_benchmark(
        template,
        p_c_grid=[0.0, 0.5],
        p_m_grid=[0.0, 1.0],
        algorithms=("clcd", "hiton-intersect"),
        n_seeds=3,
    )
    common_rows = [r for r in rows if r["metric"].startswith("common_")]
    print(render_benchmark_csv(common_rows), end="")

    print("\nshared-variable recall by cell:")
    for row in rows:
        if row["metric"] != "common_recall":
            continue
        print(f"  p_c={row['p_c']:.1f} p_m={row['p_m']:.1f} "
              f"{row['algorithm']:>16}: {row['mean']:.3f} "
              f"(std {row['std']:.3f})")


if __name__ == "__main__":
    main()
