use rand::seq::SliceRandom;

use super::*;
use crate::hypergraph::{extract_local, Hypergraph};
use crate::spectrum::SpectrumFeature;

fn small_config() -> ModelConfig {
    ModelConfig { embed_dim: 4, phi_hidden: 6, phi_out: 5, sortpool_k: 3, ..ModelConfig::default() }
}

fn toy() -> Hypergraph {
    Hypergraph::from_edge_list(vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5]]).unwrap()
}

fn random_input(rng: &mut ChaCha8Rng, n: usize, s: usize) -> ModelInput {
    let affinity = (0..n * s).map(|_| f64::from(rng.gen_range(0u32..5))).collect();
    let edges = vec![(0..n.min(3)).collect(), vec![n - 2, n - 1]];
    ModelInput::from_parts(n, s, affinity, edges, (0..s).collect(), SpectrumFeature::from_singular(3.0, 1.0))
}

fn permute_columns(input: &ModelInput, perm: &[usize]) -> ModelInput {
    let s = input.set_size();
    let affinity = input
        .affinity()
        .chunks(s)
        .flat_map(|row| perm.iter().map(move |&j| row[j]))
        .collect();
    ModelInput::from_parts(
        input.num_nodes(),
        perm.len(),
        affinity,
        input.edge_rows().to_vec(),
        input.candidate_rows().to_vec(),
        input.spectrum(),
    )
}

fn eval<F>(f: F) -> Tensor
where
    F: FnOnce(&mut Tape) -> Var,
{
    let mut tape = Tape::new();
    let v = f(&mut tape);
    tape.value(v).clone()
}

fn dense_ref(x: &[f64], w: &Tensor, b: &Tensor) -> Vec<f64> {
    (0..w.cols())
        .map(|j| b.get(0, j) + x.iter().enumerate().map(|(i, xi)| xi * w.get(i, j)).sum::<f64>())
        .collect()
}

fn relu_ref(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.max(0.0)).collect()
}

fn param<'a>(model: &'a SnalsModel, name: &str) -> &'a Tensor {
    model.params().get(model.params().id(name).unwrap())
}

#[test]
fn parameter_shapes_follow_config() {
    let model = SnalsModel::new(ModelConfig::default(), 0).unwrap();
    assert_eq!(param(&model, "phi.w1").shape(), (1, 64));
    assert_eq!(param(&model, "phi.w2").shape(), (64, 64));
    assert_eq!(param(&model, "rho.w").shape(), (64, 20));
    assert_eq!(param(&model, "mpnn.2.edge.w").shape(), (20, 20));
    assert_eq!(param(&model, "spectrum.w").shape(), (3, 8));
    assert_eq!(param(&model, "head.w").shape(), (208, 1));
    assert_eq!(param(&model, "head.b").data(), &[0.0]);
    assert!(model.params().id("mpnn.3.edge.w").is_none());
}

#[test]
fn deepsets_ignores_column_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = SnalsModel::new(small_config(), 1).unwrap();
    for _ in 0..20 {
        let input = random_input(&mut rng, 6, 4);
        let mut perm: Vec<usize> = (0..4).collect();
        perm.shuffle(&mut rng);
        let a = eval(|t| model.deepsets_standardize(t, &input).unwrap());
        let b = eval(|t| model.deepsets_standardize(t, &permute_columns(&input, &perm)).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn deepsets_matches_straight_line_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for pooling in SetPooling::ALL {
        let model = SnalsModel::new(ModelConfig { set_pooling: pooling, ..small_config() }, 2).unwrap();
        let input = random_input(&mut rng, 5, 3);
        let out = eval(|t| model.deepsets_standardize(t, &input).unwrap());
        for (i, row) in input.affinity().chunks(3).enumerate() {
            let phis: Vec<Vec<f64>> = row
                .iter()
                .map(|&x| {
                    let h = relu_ref(dense_ref(&[x], param(&model, "phi.w1"), param(&model, "phi.b1")));
                    relu_ref(dense_ref(&h, param(&model, "phi.w2"), param(&model, "phi.b2")))
                })
                .collect();
            let pooled: Vec<f64> = (0..phis[0].len())
                .map(|c| {
                    let col = phis.iter().map(|p| p[c]);
                    match pooling {
                        SetPooling::Sum => col.sum(),
                        SetPooling::Mean => col.sum::<f64>() / 3.0,
                        SetPooling::Max => col.fold(f64::NEG_INFINITY, f64::max),
                    }
                })
                .collect();
            let expected = dense_ref(&pooled, param(&model, "rho.w"), param(&model, "rho.b"));
            for (a, b) in out.row(i).iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "{pooling}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn pooling_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base = random_input(&mut rng, 4, 2);
    let doubled = permute_columns(&base, &[0, 1, 0, 1]);
    let extra = permute_columns(&base, &[0, 1, 1]);
    let (base, doubled, extra) = (&base, &doubled, &extra);

    let sum = SnalsModel::new(ModelConfig { set_pooling: SetPooling::Sum, ..small_config() }, 7).unwrap();
    let a = eval(|t| sum.deepsets_standardize(t, base).unwrap());
    let b = eval(|t| sum.deepsets_standardize(t, extra).unwrap());
    assert_ne!(a, b);

    let mean = SnalsModel::new(ModelConfig { set_pooling: SetPooling::Mean, ..small_config() }, 7).unwrap();
    let a = eval(|t| mean.deepsets_standardize(t, base).unwrap());
    let b = eval(|t| mean.deepsets_standardize(t, doubled).unwrap());
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn deepsets_rejects_singletons_and_nan() {
    let model = SnalsModel::new(small_config(), 0).unwrap();
    let f = SpectrumFeature::from_singular(1.0, 0.0);
    let single = ModelInput::from_parts(2, 1, vec![0.0, 1.0], vec![vec![0, 1]], vec![0], f);
    assert!(matches!(model.deepsets_standardize(&mut Tape::new(), &single), Err(ModelError::Input(_))));
    let nan = ModelInput::from_parts(2, 2, vec![0.0, f64::NAN, 1.0, 0.0], vec![vec![0, 1]], vec![0, 1], f);
    assert!(matches!(model.deepsets_standardize(&mut Tape::new(), &nan), Err(ModelError::Input(_))));
}

fn features(tape: &mut Tape, rows: &[Vec<f64>]) -> Var {
    tape.constant(Tensor::from_rows(rows).unwrap())
}

#[test]
fn single_edge_scenario_two_is_a_mean() {
    let config = ModelConfig { mpnn_layers: 1, norm_scenario: NormScenario::EdgeSide, ..small_config() };
    let model = SnalsModel::new(config, 11).unwrap();
    let f = SpectrumFeature::from_singular(1.0, 0.0);
    let input = ModelInput::from_parts(3, 3, vec![0.0; 9], vec![vec![0, 1, 2]], vec![0, 1, 2], f);
    let x0 = vec![vec![1.0, -2.0, 0.5, 3.0], vec![0.0, 1.0, 1.0, -1.0], vec![2.0, 0.0, -0.5, 1.0]];
    let out = eval(|t| {
        let x = features(t, &x0);
        model.bipartite_forward(t, &input, x).unwrap()
    });
    let mean: Vec<f64> = (0..4).map(|c| x0.iter().map(|r| r[c]).sum::<f64>() / 3.0).collect();
    let edge = relu_ref(dense_ref(&mean, param(&model, "mpnn.0.edge.w"), param(&model, "mpnn.0.edge.b")));
    let node = relu_ref(dense_ref(&edge, param(&model, "mpnn.0.node.w"), param(&model, "mpnn.0.node.b")));
    for i in 0..3 {
        for (a, b) in out.row(i).iter().zip(&node) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

fn two_edge_outputs(edges: Vec<Vec<usize>>) -> (Tensor, Tensor) {
    let f = SpectrumFeature::from_singular(1.0, 0.0);
    let input = ModelInput::from_parts(4, 2, vec![0.0; 8], edges, vec![0, 1], f);
    let x0 = vec![vec![1.0, 0.5, -1.0, 2.0], vec![0.0, 1.5, 1.0, 0.0], vec![-1.0, 2.0, 0.0, 1.0], vec![3.0, 0.0, 1.0, -2.0]];
    let plain = SnalsModel::new(ModelConfig { norm_scenario: NormScenario::None, ..small_config() }, 5).unwrap();
    let normed = SnalsModel::new(ModelConfig { norm_scenario: NormScenario::EdgeSide, ..small_config() }, 5).unwrap();
    // Absorb D_E⁻¹ = 1/2 into the plain model's edge weights.
    let mut absorbed = plain.clone();
    for l in 0..absorbed.config.mpnn_layers {
        let id = absorbed.params.id(&format!("mpnn.{l}.edge.w")).unwrap();
        absorbed.params.get_mut(id).scale(0.5);
    }
    let a = eval(|t| {
        let x = features(t, &x0);
        absorbed.bipartite_forward(t, &input, x).unwrap()
    });
    let b = eval(|t| {
        let x = features(t, &x0);
        normed.bipartite_forward(t, &input, x).unwrap()
    });
    (a, b)
}

#[test]
fn scenarios_one_and_two_agree_up_to_rescaling_on_equal_sizes() {
    let (a, b) = two_edge_outputs(vec![vec![0, 1], vec![2, 3]]);
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - y).abs() < 1e-12);
    }
    let (a, b) = two_edge_outputs(vec![vec![0, 1, 2], vec![2, 3]]);
    assert!(a.data().iter().zip(b.data()).any(|(x, y)| (x - y).abs() > 1e-6));
}

#[test]
fn scenarios_produce_distinct_embeddings() {
    let env = extract_local(&toy(), &[0, 1, 2], 2, 5).unwrap();
    let input = ModelInput::from_env(&env).unwrap();
    let outs: Vec<Tensor> = NormScenario::ALL
        .iter()
        .map(|&s| {
            let m = SnalsModel::new(ModelConfig { norm_scenario: s, ..small_config() }, 9).unwrap();
            eval(|t| m.structural_readout(t, &input).unwrap())
        })
        .collect();
    for i in 0..4 {
        for j in i + 1..4 {
            assert_ne!(outs[i], outs[j], "scenarios {} and {}", i + 1, j + 1);
        }
    }
}

#[test]
fn message_passing_is_row_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let env = extract_local(&toy(), &[2, 3], 1, 3).unwrap();
    let input = ModelInput::from_env(&env).unwrap();
    let n = input.num_nodes();
    for scenario in NormScenario::ALL {
        let model = SnalsModel::new(ModelConfig { norm_scenario: scenario, ..small_config() }, 13).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // Row i of the original becomes row perm[i].
        let s = input.set_size();
        let mut affinity = vec![0.0; n * s];
        for i in 0..n {
            affinity[perm[i] * s..(perm[i] + 1) * s].copy_from_slice(&input.affinity()[i * s..(i + 1) * s]);
        }
        let edges = input.edge_rows().iter().map(|m| m.iter().map(|&i| perm[i]).collect()).collect();
        let cands = input.candidate_rows().iter().map(|&i| perm[i]).collect();
        let permuted = ModelInput::from_parts(n, s, affinity, edges, cands, input.spectrum());
        let a = eval(|t| {
            let x = model.deepsets_standardize(t, &input).unwrap();
            model.bipartite_forward(t, &input, x).unwrap()
        });
        let b = eval(|t| {
            let x = model.deepsets_standardize(t, &permuted).unwrap();
            model.bipartite_forward(t, &permuted, x).unwrap()
        });
        for i in 0..n {
            for (x, y) in a.row(i).iter().zip(b.row(perm[i])) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let ra = eval(|t| model.structural_readout(t, &input).unwrap());
        let rb = eval(|t| model.structural_readout(t, &permuted).unwrap());
        assert_eq!(ra, rb);
    }
}

#[test]
fn sortpool_orders_and_pads() {
    let model = SnalsModel::new(ModelConfig { sortpool_k: 4, embed_dim: 2, ..small_config() }, 0).unwrap();
    let rows = vec![vec![9.0, 1.0], vec![5.0, 3.0], vec![0.0, 2.0], vec![7.0, 3.0]];
    let out = eval(|t| {
        let x = features(t, &rows);
        model.sortpool_readout(t, x, &[0, 1, 2]).unwrap()
    });
    assert_eq!(out.shape(), (1, 8));
    assert_eq!(out.data(), &[5.0, 3.0, 0.0, 2.0, 9.0, 1.0, 0.0, 0.0]);
    // Ties on the last channel fall back to the channel on its left.
    let out = eval(|t| {
        let x = features(t, &rows);
        model.sortpool_readout(t, x, &[1, 3]).unwrap()
    });
    assert_eq!(out.data(), &[7.0, 3.0, 5.0, 3.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn sortpool_truncates() {
    let model = SnalsModel::new(ModelConfig { sortpool_k: 2, embed_dim: 1, ..small_config() }, 0).unwrap();
    let rows = vec![vec![1.0], vec![4.0], vec![2.0]];
    let out = eval(|t| {
        let x = features(t, &rows);
        model.sortpool_readout(t, x, &[0, 1, 2]).unwrap()
    });
    assert_eq!(out.data(), &[4.0, 2.0]);
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[test]
fn readout_ignores_member_order() {
    let hg = Hypergraph::from_edge_list(vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![1, 5, 6], vec![6, 7]]).unwrap();
    let model = SnalsModel::new(small_config(), 21).unwrap();
    for set in [vec![0, 3], vec![1, 2, 4], vec![0, 2, 5, 7], vec![1, 3, 4, 6, 7]] {
        let mut reference = None;
        for perm in permutations(&set) {
            let input = ModelInput::from_env(&extract_local(&hg, &perm, 1, 3).unwrap()).unwrap();
            let readout = eval(|t| model.structural_readout(t, &input).unwrap());
            let p = model.predict(&input).unwrap();
            match &reference {
                None => reference = Some((readout, p)),
                Some((r, q)) => {
                    assert_eq!(r, &readout, "{perm:?}");
                    assert!((p - q).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn zero_head_gives_one_half() {
    let mut model = SnalsModel::new(ModelConfig::default(), 4).unwrap();
    let (w, _) = model.head_param_ids();
    model.params_mut().get_mut(w).fill_zero();
    let input = ModelInput::from_env(&extract_local(&toy(), &[0, 1, 2], 1, 3).unwrap()).unwrap();
    assert_eq!(model.predict(&input).unwrap(), 0.5);
}

#[test]
fn output_is_a_probability() {
    let model = SnalsModel::new(ModelConfig::default(), 8).unwrap();
    for set in [[0, 1, 2], [0, 3, 5], [1, 4, 5]] {
        let input = ModelInput::from_env(&extract_local(&toy(), &set, 1, 3).unwrap()).unwrap();
        let p = model.predict(&input).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}

#[test]
fn spectrum_switch_leaves_structural_branch_alone() {
    let on = SnalsModel::new(ModelConfig::default(), 31).unwrap();
    let off = SnalsModel::new(ModelConfig { spectrum_enabled: false, ..ModelConfig::default() }, 31).unwrap();
    let input = ModelInput::from_env(&extract_local(&toy(), &[0, 1, 2], 1, 3).unwrap()).unwrap();
    let a = eval(|t| on.structural_readout(t, &input).unwrap());
    let b = eval(|t| off.structural_readout(t, &input).unwrap());
    assert_eq!(a, b);
    assert_eq!(on.params().tensors(), off.params().tensors());
    assert_ne!(on.predict(&input).unwrap(), off.predict(&input).unwrap());
}

#[test]
fn inference_is_repeatable_and_dropout_only_in_training() {
    let model = SnalsModel::new(ModelConfig::default(), 2).unwrap();
    let input = ModelInput::from_env(&extract_local(&toy(), &[0, 1, 2], 1, 3).unwrap()).unwrap();
    assert_eq!(model.predict(&input).unwrap(), model.predict(&input).unwrap());
    let g1 = model.sample_gradient(&input, 1.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let g2 = model.sample_gradient(&input, 1.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(g1.loss, g2.loss);
    let g3 = model.sample_gradient(&input, 1.0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    assert_ne!(g1.probability, g3.probability);
}

#[test]
fn checkpoint_round_trip() {
    let model = SnalsModel::new(small_config(), 17).unwrap();
    let restored = SnalsModel::from_checkpoint_json(small_config(), &model.to_checkpoint_json()).unwrap();
    assert_eq!(model, restored);
    let wrong = ModelConfig { embed_dim: 5, ..small_config() };
    assert!(SnalsModel::from_checkpoint_json(wrong, &model.to_checkpoint_json()).is_err());
}

#[test]
fn invalid_config_is_rejected() {
    assert!(matches!(
        SnalsModel::new(ModelConfig { sortpool_k: 1, ..ModelConfig::default() }, 0),
        Err(ModelError::Config(_))
    ));
}
