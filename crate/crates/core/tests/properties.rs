mod common;

use std::path::Path;

use common::*;
use latentstep::eval::{cluster_accuracy, cut_report, GroundTruth};
use latentstep::graph::{self, degrees, entropy, row_normalize, total_normalize, Axis};
use latentstep::ingest::{bigram_graph, format_edge_list, gen_bicliques, parse_edge_list};
use latentstep::model::{self, presets};
use latentstep::{AdjacencyMatrix, BipartiteGraph, LatentGraph, LatentStepModel, Matrix};
use proptest::prelude::*;

fn positive_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    use rand::Rng;
    let mut r = rng(seed);
    Matrix::from_fn(
        rows,
        cols,
        |_, _| if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.0..5.0) },
    )
}

fn with_nonzero_rows(mut m: Matrix) -> Matrix {
    for i in 0..m.rows() {
        if m.row(i).iter().all(|&x| x == 0.0) {
            m.row_mut(i)[0] = 1.0;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_normalize_idempotent_and_scale_free(rows in 1usize..8, cols in 1usize..8, seed: u64, c in 1e-3f64..1e3) {
        let m = with_nonzero_rows(positive_matrix(rows, cols, seed));
        let p = row_normalize(&m).unwrap();
        let pp = row_normalize(p.probs()).unwrap();
        prop_assert!(p.probs().max_abs_diff(pp.probs()) < 1e-12);
        let scaled = row_normalize(&m.scale(c)).unwrap();
        prop_assert!(p.probs().max_abs_diff(scaled.probs()) < 1e-12);
        let t = total_normalize(&m).unwrap();
        prop_assert!(t.max_abs_diff(&total_normalize(&m.scale(c)).unwrap()) < 1e-12);
        prop_assert!((t.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_degrees_and_entropy_bound(n in 1usize..10, seed: u64) {
        let m = with_nonzero_rows(positive_matrix(n, n, seed));
        let sym = m.add(&m.transpose());
        let r = degrees(&sym, Axis::Rows);
        let c = degrees(&sym, Axis::Columns);
        for (x, y) in r.values().iter().zip(c.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let nonzero = sym.as_slice().iter().filter(|&&x| x > 0.0).count();
        let h = entropy(&total_normalize(&sym).unwrap()).unwrap();
        prop_assert!(h <= (nonzero as f64).ln() + 1e-9);
    }

    #[test]
    fn forward_model_invariants(n in 2usize..=10, m in 1usize..=4, seed: u64) {
        let mut r = rng(seed);
        let vp = uniform_matrix(&mut r, n, m, 3.0);
        let wp = uniform_matrix(&mut r, m, m, 3.0);
        let w = LatentGraph::from_params(&wp).unwrap();
        let v = BipartiteGraph::from_params(&vp, &w).unwrap();

        prop_assert!(w.weights().asymmetry() < 1e-12);
        prop_assert!(w.weights().as_slice().iter().all(|&x| x > 0.0));
        prop_assert!((w.weights().sum() - 1.0).abs() < 1e-12);
        for (cs, d) in model::column_sums(&v).iter().zip(w.degrees()) {
            prop_assert!((cs - d).abs() < 1e-12);
        }

        let b = model::reconstruct(&v, &w).unwrap();
        let bw = b.weights();
        prop_assert!(bw.asymmetry() < 1e-12);
        prop_assert!((bw.sum() - 1.0).abs() < 1e-10);
        for (x, y) in bw.row_sums().iter().zip(v.weights().row_sums()) {
            prop_assert!((x - y).abs() < 1e-10);
        }

        let pi_b = row_normalize(bw).unwrap();
        let t = model::transition(&v, &w).unwrap();
        prop_assert!(pi_b.probs().max_abs_diff(t.probs()) < 1e-10);

        // the library agrees with the definition-level reference
        let rw = ref_latent(&wp);
        let rv = ref_bipartite(&vp, &rw);
        prop_assert!((dm(w.weights()) - &rw).amax() < 1e-12);
        prop_assert!((dm(v.weights()) - &rv).amax() < 1e-12);
        prop_assert!((dm(bw) - ref_reconstruction(&rv, &rw)).amax() < 1e-12);
        prop_assert!((dm(t.probs()) - ref_transition(&rv, &rw)).amax() < 1e-10);

        let s = singular_values(&dm(bw));
        for &sigma in &s[m.min(n)..] {
            prop_assert!(sigma < 1e-10 * s[0], "sigma {} vs max {}", sigma, s[0]);
        }
    }

    #[test]
    fn loss_matches_reference(n in 2usize..=8, m in 1usize..=3, joint: bool, reg in prop_oneof![Just(0.0), Just(0.1)], seed: u64) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let model = random_model(&mut r, n, m, joint, reg);
        let lib = model.loss(&a).unwrap();
        prop_assert!((lib - ref_loss(&model, &a)).abs() < 1e-10 * lib.abs().max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences(n in 2usize..=8, m in 1usize..=3, joint: bool, reg in prop_oneof![Just(0.0), Just(0.1)], seed: u64) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let model = random_model(&mut r, n, m, joint, reg);
        let err = gradient_error_5pt(&model, &a, 1e-3);
        prop_assert!(err < 1e-6, "max relative error {}", err);
    }

    #[test]
    fn data_term_bounded_by_entropy(n in 2usize..=8, m in 1usize..=3, joint: bool, seed: u64) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let model = random_model(&mut r, n, m, joint, 0.0);
        let h = entropy(&total_normalize(a.weights()).unwrap()).unwrap();
        prop_assert!((h - entropy_of(&a)).abs() < 1e-12);
        prop_assert!(model.data_term(&a).unwrap() >= h - 1e-10);
    }

    #[test]
    fn loss_is_scale_invariant(n in 2usize..=8, m in 1usize..=3, seed: u64, c in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let model = random_model(&mut r, n, m, true, 0.1);
        let scaled = AdjacencyMatrix::new(a.weights().scale(c)).unwrap();
        prop_assert!((model.loss(&a).unwrap() - model.loss(&scaled).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn loss_is_permutation_equivariant(n in 2usize..=8, m in 1usize..=3, seed: u64, shuffle_seed: u64) {
        use rand::seq::SliceRandom;
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let model = random_model(&mut r, n, m, false, 0.1);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(shuffle_seed));

        let pa = a.permuted(&perm).unwrap();
        let vp = &model.params().vp;
        let pvp = Matrix::from_fn(n, m, |i, j| vp[(perm[i], j)]);
        let latent = model.fixed_latent().unwrap().clone();
        let pmodel = LatentStepModel::with_fixed_latent(pvp, latent, 0.1).unwrap();
        prop_assert!((model.loss(&a).unwrap() - pmodel.loss(&pa).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn column_shift_leaves_data_term_unchanged(n in 2usize..=8, m in 1usize..=3, col in 0usize..3, shift in -5.0f64..5.0, seed: u64) {
        let col = col % m;
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let model = random_model(&mut r, n, m, true, 0.0);
        let mut shifted = model.clone();
        let mut x = model.params().to_vec();
        for i in 0..n {
            x[i * m + col] += shift;
        }
        shifted.set_params_from_slice(&x);
        prop_assert!((model.data_term(&a).unwrap() - shifted.data_term(&a).unwrap()).abs() < 1e-10);
        // and the gradient has no component along the shift
        let g = model.loss_gradient(&a).unwrap().to_vec();
        let along: f64 = (0..n).map(|i| g[i * m + col]).sum();
        prop_assert!(along.abs() < 1e-10);
    }

    #[test]
    fn matrix_text_round_trip(rows in 1usize..6, cols in 1usize..6, seed: u64) {
        let mut r = rng(seed);
        let m = uniform_matrix(&mut r, rows, cols, 1e6);
        let text = graph::format_matrix(&m);
        prop_assert_eq!(graph::parse_matrix(&text, Path::new("mem")).unwrap(), m);
    }

    #[test]
    fn edge_list_round_trip(n in 2usize..8, seed: u64) {
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let text = format_edge_list(&a);
        let back = parse_edge_list(&text, Path::new("mem")).unwrap();
        prop_assert!(back.weights().max_abs_diff(a.weights()) < 1e-12);
    }

    #[test]
    fn bigram_graph_mass_and_symmetry(words in prop::collection::vec("[abc]{0,6}", 1..20)) {
        let seqs: Vec<Vec<String>> = words.iter().map(|w| w.chars().map(String::from).collect()).collect();
        let pairs: usize = seqs.iter().map(|s| s.len().saturating_sub(1)).sum();
        prop_assume!(pairs > 0);
        let g = bigram_graph(&seqs, &["a", "b", "c"]).unwrap();
        prop_assert_eq!(g.pairs, pairs);
        prop_assert_eq!(g.graph.weights().asymmetry(), 0.0);
        prop_assert_eq!(g.graph.total_mass(), 2.0 * pairs as f64);
    }

    #[test]
    fn bicliques_are_block_structured(k in 1usize..4, a in 1usize..5, b in 1usize..5) {
        let g = gen_bicliques(k, a, b, 1.0).unwrap();
        let size = a + b;
        for i in 0..g.n() {
            for j in 0..g.n() {
                let same_block = i / size == j / size;
                let opposite = (i % size < a) != (j % size < a);
                prop_assert_eq!(g.weights()[(i, j)] > 0.0, same_block && opposite);
            }
        }
    }

    #[test]
    fn cut_report_relabeling(n in 3usize..9, m in 2usize..4, seed: u64) {
        use rand::{seq::SliceRandom, Rng};
        let mut r = rng(seed);
        let a = random_graph(&mut r, n);
        let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..m)).collect();
        let mut sigma: Vec<usize> = (0..m).collect();
        sigma.shuffle(&mut r);
        let relabeled: Vec<usize> = labels.iter().map(|&l| sigma[l]).collect();

        let base = cut_report(&a, &labels, m).unwrap();
        let moved = cut_report(&a, &relabeled, m).unwrap();
        let total: f64 = base.pair_mass.iter().flatten().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for p in 0..m {
            for q in 0..m {
                prop_assert!((base.pair_mass[p][q] - moved.pair_mass[sigma[p]][sigma[q]]).abs() < 1e-15);
            }
        }
        prop_assert!((base.within_fraction - moved.within_fraction).abs() < 1e-12);
    }

    #[test]
    fn accuracy_ignores_relabeling_and_node_order(n in 2usize..10, seed: u64) {
        use rand::{seq::SliceRandom, Rng};
        let mut r = rng(seed);
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let classes = names.iter().map(|s| (s.clone(), format!("c{}", r.gen_range(0..3)))).collect();
        let truth = GroundTruth::new("t", classes);
        let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..3)).collect();
        let base = cluster_accuracy(&labels, &truth, &names).unwrap();

        let swap = [2, 0, 1];
        let relabeled: Vec<usize> = labels.iter().map(|&l| swap[l]).collect();
        prop_assert_eq!(cluster_accuracy(&relabeled, &truth, &names).unwrap(), base);

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let l2: Vec<usize> = order.iter().map(|&i| labels[i]).collect();
        let n2: Vec<String> = order.iter().map(|&i| names[i].clone()).collect();
        prop_assert_eq!(cluster_accuracy(&l2, &truth, &n2).unwrap(), base);
    }
}

#[test]
fn zero_row_is_rejected() {
    let m = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]);
    assert!(row_normalize(&m).is_err());
}

#[test]
fn preset_latent_graphs_keep_the_loss_finite() {
    let a = gen_bicliques(2, 2, 2, 1.0).unwrap();
    let mut r = rng(7);
    for latent in [
        presets::clique(3),
        presets::biclique(),
        presets::triangle(),
        presets::biclique_union(3),
    ] {
        let vp = uniform_matrix(&mut r, 8, latent.m(), 1.0);
        let model = LatentStepModel::with_fixed_latent(vp, latent, 0.1).unwrap();
        assert!(model.loss(&a).unwrap().is_finite());
        assert!(gradient_error_5pt(&model, &a, 1e-3) < 1e-6);
    }
}
