"""End-to-end causal feature selection with a downstream probe.

Draws a multi-label network where one label causes another, so a naive
boundary learner returns a label as a "feature". The selection pipeline
replaces it with admissible upstream variables, picks one stand-in per
shared cause, and the selected subset is then handed to a per-label naive
Bayes probe. Selecting a handful of causal features keeps the prediction
quality of using every variable.
"""

from clcd import (
    GenConfig,
    br_nb_predict,
    br_nb_train,
    clcd_fs,
    f_scores,
    generate,
    hamming_loss,
    label_matrix,
    ranking_loss,
    sample,
    split_dataset,
)


def probe(ds, features):
    train, test = split_dataset(ds, 0.7, seed=99)
    model = br_nb_train(train, features)
    pred, scores = br_nb_predict(model, test)
    truth = label_matrix(test)
    macro, micro = f_scores(pred, truth)
    return {
        "hamming": hamming_loss(pred, truth),
        "ranking": ranking_loss(scores, truth),
        "f_macro": macro,
        "f_micro": micro,
    }


def main():
    gcfg = GenConfig(n_labels=4, n_features=30, n_samples=6000,
                     share_prob=0.6, p_c=0.5, p_m=0.5, seed=4)
    net, _ = generate(gcfg)
    ds = sample(net, gcfg.n_samples, seed=4)
    names = net.names

    result = clcd_fs(ds)
    print("common choices (greedy, widest label coverage first):")
    for choice in result.common:
        feats = sorted(names[v] for v in choice.features)
        labs = "+".join(names[t] for t in sorted(choice.labels))
        print(f"  {feats} covers {labs}")
        for t, members in sorted(choice.replaced.items()):
            stood_for = sorted(names[v] for v in members)
            if set(stood_for) != set(feats):
                print(f"    stands in for {stood_for} of {names[t]}")
    print("label-specific features:")
    for t in sorted(result.specific):
        print(f"  {names[t]}: {sorted(names[v] for v in result.specific[t])}")

    selected = result.selected_names(ds)
    print(f"\nselected {len(selected)} of {len(ds.features)} features: "
          f"{selected}")

    on_selected = probe(ds, sorted(result.selected))
    on_all = probe(ds, list(ds.features))
    print(f"\n{'probe':>12} {'selected':>9} {'all features':>13}")
    for key in ("hamming", "ranking", "f_macro", "f_micro"):
        print(f"{key:>12} {on_selected[key]:9.3f} {on_all[key]:13.3f}")


if __name__ == "__main__":
    main()
