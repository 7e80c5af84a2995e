"""Cross-validated model selection: factor kernel against the edge baseline.

Runs the same stratified grid-search protocol for both methods on one small
synthetic dataset and prints the winning configurations side by side. Grids
are kept tiny here so the sweep finishes in seconds; the command-line tool
defaults to the full ranges.
"""

from ssgk import GridSpec, SyntheticConfig, generate_synthetic, grid_search, render_report


def main():
    dataset = generate_synthetic(
        SyntheticConfig(
            num_classes=2,
            dim=8,
            template_rank=2,
            noise_sigma=0.3,
            train_per_class=6,
            test_per_class=3,
            seed=2,
        )
    )
    train_labels = dataset.train_manifest.labels
    test_labels = dataset.test_manifest.labels

    grid = GridSpec(
        c_values=(0.25, 1.0, 4.0),
        gamma_values=(0.125, 0.5),
        r_values=(1, 2),
        lambda_values=(0.25,),
    )
    for method in ("ssgk", "edge"):
        report = grid_search(
            dataset.train_matrices,
            train_labels,
            grid,
            method=method,
            folds=3,
            seed=0,
            test_matrices=dataset.test_matrices,
            test_labels=test_labels,
        )
        b = report.best
        rank = "-" if b.rank is None else b.rank
        lam = "-" if b.lam is None else b.lam
        print(
            f"{method:>5}: best rank={rank} lam={lam} gamma={b.gamma:g} c={b.c:g} "
            f"val {b.val_accuracy:.2f} test {report.test_accuracy:.2f} "
            f"({report.wall_time_s:.1f}s, {len(report.rows)} rows)"
        )

    print("\nfull ssgk report:\n")
    report = grid_search(
        dataset.train_matrices,
        train_labels,
        grid,
        folds=3,
        seed=0,
        test_matrices=dataset.test_matrices,
        test_labels=test_labels,
    )
    print(render_report(report))


if __name__ == "__main__":
    main()
