use super::*;

fn sp(change: ChangeClass, seed: u64) -> SPParams {
    SPParams { change, seed, ..SPParams::default() }
}

fn edge_list(net: &TemporalNetwork) -> Vec<u8> {
    let mut out = Vec::new();
    net.write_edge_list(&mut out).unwrap();
    out
}

#[test]
fn sp_probabilities_at_rho_one() {
    // shares 16 * (27, 18, 12, 8) / 65
    let p = SpProbabilities::solve(&SPParams::default()).unwrap();
    let expect = [432.0 / 65.0, 288.0 / 65.0, 192.0 / 65.0, 128.0 / 65.0];
    for (share, e) in p.degree_shares.iter().zip(expect) {
        assert!((share - e).abs() < 1e-12);
    }
    assert!((p.p_small - 48.0 / 65.0).abs() < 1e-15);
    assert!((p.p_medium - 288.0 / 65.0 / 30.0).abs() < 1e-15);
    assert!((p.p_large - 192.0 / 65.0 / 120.0).abs() < 1e-15);
    assert!((p.p_background - 128.0 / 65.0 / 480.0).abs() < 1e-15);
}

#[test]
fn larger_rho_narrows_the_level_contrast() {
    let at = |rho| SpProbabilities::solve(&SPParams { rho, ..SPParams::default() }).unwrap();
    let (a, b) = (at(1.0), at(2.0));
    assert!(b.p_small / b.p_medium < a.p_small / a.p_medium);
    assert!(b.p_large / b.p_background < a.p_large / a.p_background);
    assert!((b.degree_shares.iter().sum::<f64>() - 16.0).abs() < 1e-12);
}

#[test]
fn sp_rejects_bad_parameters() {
    for params in [
        SPParams { rho: 0.0, ..SPParams::default() },
        SPParams { rho: 5.5, ..SPParams::default() },
        SPParams { k_bar: -1.0, ..SPParams::default() },
        SPParams { k_bar: 40.0, rho: 0.1, ..SPParams::default() },
        SPParams { n_large: 1, ..SPParams::default() },
        SPParams { persistence: 1.5, ..SPParams::default() },
    ] {
        assert!(matches!(generate_sp_temporal(&params), Err(Error::Domain(_))), "{params:?}");
    }
}

#[test]
fn sp_is_a_pure_function_of_params_and_seed() {
    let a = generate_sp_temporal(&SPParams { n_layers: Some(3), ..sp(ChangeClass::Msc, 7) }).unwrap();
    let b = generate_sp_temporal(&SPParams { n_layers: Some(3), ..sp(ChangeClass::Msc, 7) }).unwrap();
    let c = generate_sp_temporal(&SPParams { n_layers: Some(3), ..sp(ChangeClass::Msc, 8) }).unwrap();
    assert_eq!(edge_list(&a.network), edge_list(&b.network));
    assert_eq!(a.truth, b.truth);
    assert_eq!(a.metadata, b.metadata);
    assert_ne!(edge_list(&a.network), edge_list(&c.network));
}

#[test]
fn sp_defaults_and_schedule() {
    for (class, t, merge, split) in [(ChangeClass::Ssc, 21, 7, 14), (ChangeClass::Msc, 17, 6, 12), (ChangeClass::Lsc, 33, 11, 22)] {
        let p = sp(class, 0);
        assert_eq!(p.layers(), t);
        assert_eq!(p.n_nodes(), 640);
        assert_eq!(p.merge_split_layers(), (merge, split));
    }
}

#[test]
fn sp_truths_nest_and_change_only_at_the_schedule() {
    for class in [ChangeClass::Ssc, ChangeClass::Msc, ChangeClass::Lsc] {
        let params = SPParams { n_layers: Some(7), ..sp(class, 1) };
        let b = generate_sp_temporal(&params).unwrap();
        let (merge, split) = (b.metadata.merge_layer, b.metadata.split_layer);
        assert_eq!((merge, split), (3, 5));
        let names = ["small", "medium", "large"];
        for t in 0..7 {
            for w in names.windows(2) {
                let fine = &b.truth.scale(w[0]).unwrap()[t];
                let coarse = &b.truth.scale(w[1]).unwrap()[t];
                for i in 0..640 {
                    for j in 0..640 {
                        if fine[i] == fine[j] {
                            assert_eq!(coarse[i], coarse[j], "{class:?} t={t} {}", w[0]);
                        }
                    }
                }
            }
        }
        let changed = match class {
            ChangeClass::Ssc => "small",
            ChangeClass::Msc => "medium",
            ChangeClass::Lsc => "large",
        };
        for name in names {
            let layers = b.truth.scale(name).unwrap();
            for t in 1..7 {
                let boundary = t + 1 == merge || t + 1 == split;
                let same = layers[t] == layers[t - 1];
                assert_eq!(same, !(boundary && name == changed), "{class:?} {name} t={t}");
            }
        }
        let count = |t: usize| {
            let l = &b.truth.scale(changed).unwrap()[t];
            crate::metrics::relabel(l).1
        };
        assert_eq!(count(merge - 1), count(0) - 1);
    }
}

#[test]
fn sp_mean_degree_is_calibrated() {
    for k_bar in [11.0, 16.0, 21.0] {
        let mut total = 0.0;
        for seed in 0..20 {
            let b = generate_sp_temporal(&SPParams { k_bar, ..sp(ChangeClass::Ssc, seed) }).unwrap();
            total += b.network.mean_degree();
        }
        let mean = total / 20.0;
        assert!((mean - k_bar).abs() <= 0.05 * k_bar, "k_bar {k_bar}: {mean}");
    }
}

fn layer_overlap(net: &TemporalNetwork, t: usize) -> usize {
    let (a, b) = (net.layer(t), net.layer(t + 1));
    (0..net.n_nodes())
        .map(|i| a.row(i).0.iter().filter(|&&j| j > i && b.get(i, j) > 0.0).count())
        .sum()
}

#[test]
fn sp_full_persistence_repeats_layers_between_changes() {
    let params = SPParams { persistence: 1.0, ..sp(ChangeClass::Lsc, 4) };
    let b = generate_sp_temporal(&params).unwrap();
    let (merge, split) = (b.metadata.merge_layer, b.metadata.split_layer);
    // forced edges are not carried over, so compare only layers without them
    for t in 0..b.metadata.n_layers - 1 {
        if t + 2 == merge || t + 2 == split || b.metadata.forced_edges[t] + b.metadata.forced_edges[t + 1] > 0 {
            continue;
        }
        assert_eq!(b.network.layer(t), b.network.layer(t + 1), "t={t}");
    }
    assert_ne!(b.network.layer(merge - 2), b.network.layer(merge - 1));
}

#[test]
fn sp_persistence_raises_overlap_but_not_degree() {
    let (mut overlap, mut degree) = ([0.0; 2], [0.0; 2]);
    for seed in 0..5 {
        for (k, persistence) in [0.0, 0.5].into_iter().enumerate() {
            let b = generate_sp_temporal(&SPParams { persistence, ..sp(ChangeClass::Ssc, seed) }).unwrap();
            overlap[k] += (0..20).map(|t| layer_overlap(&b.network, t)).sum::<usize>() as f64;
            degree[k] += b.network.mean_degree();
        }
    }
    assert!(overlap[1] > 1.5 * overlap[0], "{overlap:?}");
    assert!((degree[1] - degree[0]).abs() < 0.02 * degree[0], "{degree:?}");
}

#[test]
fn repair_leaves_no_isolated_node_times() {
    let cfg = GranellConfig { p_in: 0.04, p_out: 0.0, n_layers: 10, ..GranellConfig::default() };
    let b = generate_granell(&cfg).unwrap();
    assert!(b.metadata.forced_edges.iter().sum::<usize>() > 0);
    for t in 0..10 {
        assert!(b.network.layer_degrees(t).iter().all(|&d| d > 0.0));
    }
    let truth = &b.truth.scale("truth").unwrap();
    // forced edges stay inside the planted community
    for t in 0..10 {
        for i in 0..128 {
            let (nb, _) = b.network.layer(t).row(i);
            assert!(nb.iter().all(|&j| truth[t][j] == truth[t][i]));
        }
    }
}

#[test]
fn granell_grow_transfers_monotonically() {
    let b = generate_granell(&GranellConfig::new(GranellModel::Grow, 128, 100, 3)).unwrap();
    let truth = b.truth.scale("truth").unwrap();
    assert_ne!(truth[0], truth[99]);
    let moved = &b.metadata.transferred;
    assert_eq!(moved[0], 0);
    assert_eq!(moved[99], 16);
    assert!(moved.windows(2).all(|w| w[0] <= w[1]));
    for t in 0..100 {
        let size0 = truth[t].iter().filter(|&&g| g == 0).count();
        assert_eq!(size0, 32 + moved[t]);
    }
    assert!(b.metadata.merged_layers.is_empty());
}

#[test]
fn granell_zero_rates_give_a_static_partition() {
    for model in [GranellModel::Grow, GranellModel::Merge, GranellModel::Mixed] {
        let cfg = GranellConfig { grow_fraction: 0.0, merge_strength: 0.0, ..GranellConfig::new(model, 128, 20, 1) };
        let b = generate_granell(&cfg).unwrap();
        let truth = b.truth.scale("truth").unwrap();
        assert!(truth.iter().all(|l| *l == truth[0]), "{model:?}");
        assert!(b.metadata.merge_cross_probability.iter().all(|&p| p == cfg.p_out));
    }
}

#[test]
fn granell_merge_follows_its_schedule() {
    let b = generate_granell(&GranellConfig::new(GranellModel::Merge, 128, 100, 0)).unwrap();
    let p = &b.metadata.merge_cross_probability;
    assert_eq!(p[0], 0.02);
    assert_eq!(p[50], 0.45);
    assert_eq!(p[99], 0.02);
    let peak = p.iter().position(|&v| v == 0.45).unwrap();
    assert!(p[..=peak].windows(2).all(|w| w[0] <= w[1]));
    let truth = b.truth.scale("truth").unwrap();
    assert_eq!(crate::metrics::relabel(&truth[50]).1, 3);
    assert_eq!(crate::metrics::relabel(&truth[0]).1, 4);
    let merged = &b.metadata.merged_layers;
    assert!(merged.windows(2).all(|w| w[1] == w[0] + 1), "one contiguous merged period");
    for &t in merged {
        assert!(p[t - 1] >= 0.02 + 0.5 * 0.43 - 1e-12);
    }
}

#[test]
fn granell_within_density_exceeds_between_at_every_layer() {
    for model in [GranellModel::Grow, GranellModel::Merge, GranellModel::Mixed] {
        let mut within = vec![(0usize, 0usize); 100];
        let mut between = vec![(0usize, 0usize); 100];
        for seed in 0..20 {
            let b = generate_granell(&GranellConfig::new(model, 128, 100, seed)).unwrap();
            let truth = b.truth.scale("truth").unwrap();
            for t in 0..100 {
                let layer = b.network.layer(t);
                for i in 0..128 {
                    for j in i + 1..128 {
                        let e = usize::from(layer.get(i, j) > 0.0);
                        let slot = if truth[t][i] == truth[t][j] { &mut within[t] } else { &mut between[t] };
                        slot.0 += e;
                        slot.1 += 1;
                    }
                }
            }
        }
        for t in 0..100 {
            let d_in = within[t].0 as f64 / within[t].1 as f64;
            let d_out = between[t].0 as f64 / between[t].1 as f64;
            assert!(d_in > d_out, "{model:?} t={t}: {d_in} vs {d_out}");
        }
    }
}

#[test]
fn granell_rejects_small_or_inconsistent_configs() {
    let bad = [
        GranellConfig::new(GranellModel::Grow, 12, 10, 0),
        GranellConfig::new(GranellModel::Merge, 0, 10, 0),
        GranellConfig::new(GranellModel::Merge, 128, 0, 0),
        GranellConfig { n_groups: 3, ..GranellConfig::new(GranellModel::Mixed, 128, 10, 0) },
        GranellConfig { p_in: 0.01, ..GranellConfig::default() },
        GranellConfig { merge_phases: [0.5, 0.4, 0.6, 0.8], ..GranellConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(generate_granell(&cfg), Err(Error::Domain(_))), "{cfg:?}");
    }
}

#[test]
fn truth_csv_uses_one_based_layers() {
    let mut truth = GroundTruth::new(2, 2);
    truth.insert("truth", vec![vec![0, 0], vec![0, 1]]).unwrap();
    let mut out = Vec::new();
    truth.write_csv("truth", &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "node,layer,community\n0,1,0\n1,1,0\n0,2,0\n1,2,1\n");
    assert_eq!(truth.flat("truth").unwrap(), vec![0, 0, 0, 1]);
    assert!(truth.insert("bad", vec![vec![0]]).is_err());
    assert!(matches!(truth.scale("nope"), Err(Error::Domain(_))));
}
