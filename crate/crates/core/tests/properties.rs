use nalgebra::DMatrix;
use proptest::prelude::*;
use rankgauge::analysis::{eckart_young_check, pearson};
use rankgauge::ingest::{
    parse_manifest, read_npy, subsample_indices, write_npy_to, HpValue, RunManifest, RunRecord,
};
use rankgauge::metrics::{alpha_req_fit, classical_rank, rankme};
use rankgauge::selection::{clip_rank, select_by_rank};
use rankgauge::spectrum::{singular_values, SpectrumPath};
use rankgauge::synth::random_orthogonal;
use rankgauge::{Dtype, EigenSpectrum, EmbeddingMatrix, MetricConfig, SingularSpectrum};

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = EmbeddingMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(n, k)| {
        prop::collection::vec(-1.0f64..1.0, n * k)
            .prop_map(move |data| EmbeddingMatrix::new(n, k, data, Dtype::F64).unwrap())
    })
}

fn spectrum_strategy() -> impl Strategy<Value = SingularSpectrum> {
    prop::collection::vec(0.0f64..10.0, 1..200)
        .prop_filter("nonzero", |v| v.iter().any(|&x| x > 0.0))
        .prop_map(|v| SingularSpectrum::square(v).unwrap())
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(abs)
}

fn exact() -> MetricConfig {
    MetricConfig::default().with_entropy_epsilon(0.0)
}

fn manifest(ranks: &[f64]) -> RunManifest {
    RunManifest {
        axis_name: "w".into(),
        ordered: true,
        runs: ranks
            .iter()
            .enumerate()
            .map(|(i, &r)| RunRecord::with_rank(format!("run{i}"), HpValue::Number(i as f64), r))
            .collect(),
        base_dir: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paths_agree(m in matrix_strategy(80, 64)) {
        let d = singular_values(&m, SpectrumPath::Direct).unwrap();
        let g = singular_values(&m, SpectrumPath::Gram).unwrap();
        prop_assert_eq!(d.len(), g.len());
        for (a, b) in d.values().iter().zip(g.values()) {
            prop_assert!(close(*a, *b, 1e-6, 1e-9), "{} vs {}", a, b);
        }
    }

    #[test]
    fn orthogonal_invariance(m in matrix_strategy(24, 16), seed in any::<u64>()) {
        let (n, k) = m.shape();
        let u = random_orthogonal(n, seed);
        let v = random_orthogonal(k, seed.wrapping_add(1));
        let rotated = EmbeddingMatrix::from_dmatrix(&(u * m.to_dmatrix() * v)).unwrap();
        let s0 = singular_values(&m, SpectrumPath::Direct).unwrap();
        let s1 = singular_values(&rotated, SpectrumPath::Direct).unwrap();
        let top = s0.max();
        for (a, b) in s0.values().iter().zip(s1.values()) {
            prop_assert!(close(*a, *b, 1e-8, 1e-12 * top), "{} vs {}", a, b);
        }
    }

    #[test]
    fn scaling_equivariance(m in matrix_strategy(40, 20), c in 1e-3f64..1e3) {
        for path in [SpectrumPath::Direct, SpectrumPath::Gram] {
            let s0 = singular_values(&m, path).unwrap();
            let s1 = singular_values(&m.scaled(c), path).unwrap();
            let top = s0.max();
            for (a, b) in s0.values().iter().zip(s1.values()) {
                prop_assert!(close(c * a, *b, 1e-10, 1e-12 * c * top), "{:?}: {} vs {}", path, c * a, b);
            }
        }
    }

    #[test]
    fn energy_matches_frobenius(m in matrix_strategy(40, 20)) {
        let s = singular_values(&m, SpectrumPath::Direct).unwrap();
        let energy: f64 = s.values().iter().map(|v| v * v).sum();
        prop_assert!(close(energy, m.frobenius_sq(), 1e-10, 1e-300));
    }

    #[test]
    fn rankme_bounds(s in spectrum_strategy()) {
        let r = rankme(&s, &exact());
        let support = s.values().iter().filter(|&&v| v > 0.0).count() as f64;
        prop_assert!(r >= 1.0 - 1e-12 && r <= support * (1.0 + 1e-12), "{} not in [1, {}]", r, support);
    }

    #[test]
    fn rankme_scale_invariance(s in spectrum_strategy(), c in 1e-3f64..1e3) {
        let a = rankme(&s, &exact());
        let b = rankme(&s.scaled(c), &exact());
        prop_assert!(close(a, b, 1e-12, 0.0), "{} vs {}", a, b);
        let cfg = MetricConfig::default();
        prop_assert!((rankme(&s, &cfg) - rankme(&s.scaled(c), &cfg)).abs() < 1e-4);
    }

    #[test]
    fn alpha_scale_invariance(alpha in 0.0f64..3.0, c in 1e-3f64..1e3, len in 3usize..200) {
        let lambda: Vec<f64> = (1..=len).map(|i| (i as f64).powf(-alpha)).collect();
        let e = EigenSpectrum::from_values(lambda, true).unwrap();
        let cfg = MetricConfig::default();
        let a = alpha_req_fit(&e, &cfg).unwrap().alpha;
        let b = alpha_req_fit(&e.scaled(c), &cfg).unwrap().alpha;
        prop_assert!((a - b).abs() < 1e-9 && (a - alpha).abs() < 1e-9, "{} {} {}", a, b, alpha);
    }

    #[test]
    fn selected_run_has_max_rank(ranks in prop::collection::vec(prop_oneof![0.0f64..100.0, Just(50.0)], 1..30)) {
        let r = select_by_rank(&manifest(&ranks), 0.0).unwrap();
        let max = ranks.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(r.chosen_rank, Some(max));
        prop_assert_eq!(r.trace.len(), ranks.len());
    }

    #[test]
    fn strict_max_survives_reordering(
        (ranks, order) in prop::collection::vec(0.0f64..100.0, 1..30).prop_flat_map(|r| {
            let order = Just((0..r.len()).collect::<Vec<usize>>()).prop_shuffle();
            (Just(r), order)
        })
    ) {
        let max = ranks.iter().cloned().fold(f64::MIN, f64::max);
        prop_assume!(ranks.iter().filter(|&&r| r == max).count() == 1);
        let mut m = manifest(&ranks);
        let chosen = select_by_rank(&m, 0.0).unwrap().chosen_run_id;
        m.runs = order.iter().map(|&i| m.runs[i].clone()).collect();
        m.ordered = false;
        prop_assert_eq!(select_by_rank(&m, 0.0).unwrap().chosen_run_id, chosen);
    }

    #[test]
    fn monotone_sweeps(mut ranks in prop::collection::btree_set(0u32..10_000, 1..30)
        .prop_map(|s| s.into_iter().map(f64::from).collect::<Vec<_>>())) {
        let n = ranks.len();
        prop_assert_eq!(select_by_rank(&manifest(&ranks), 0.0).unwrap().chosen_index, n - 1);
        ranks.reverse();
        prop_assert_eq!(select_by_rank(&manifest(&ranks), 0.0).unwrap().chosen_index, 0);
    }

    #[test]
    fn clip_idempotent_and_monotone(a in 0.0f64..5000.0, b in 0.0f64..5000.0, cap in 1.0f64..4096.0) {
        prop_assert_eq!(clip_rank(clip_rank(a, cap), cap), clip_rank(a, cap));
        if a <= b {
            prop_assert!(clip_rank(a, cap) <= clip_rank(b, cap));
        }
    }

    #[test]
    fn pearson_symmetric_and_affine(
        pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..50),
        slope in 0.01f64..100.0,
        shift in -100.0f64..100.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()); };
        prop_assert!(r.abs() <= 1.0 + 1e-12);
        prop_assert!((pearson(&y, &x).unwrap() - r).abs() < 1e-12);
        let mapped: Vec<f64> = x.iter().map(|v| slope * v + shift).collect();
        prop_assert!((pearson(&mapped, &y).unwrap() - r).abs() < 1e-9);
    }

    #[test]
    fn npy_round_trip(m in matrix_strategy(20, 20), single in any::<bool>()) {
        let m = if single {
            let data = m.as_slice().iter().map(|&v| v as f32 as f64).collect();
            EmbeddingMatrix::new(m.n_rows(), m.n_cols(), data, Dtype::F32).unwrap()
        } else {
            m
        };
        let mut buf = Vec::new();
        write_npy_to(&mut buf, &m).unwrap();
        let back = read_npy(buf.as_slice()).unwrap();
        prop_assert_eq!(back.dtype(), m.dtype());
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn subsample_is_deterministic_without_duplicates(n_rows in 1usize..5000, n in 1usize..6000, seed in any::<u64>()) {
        let a = subsample_indices(n_rows, n, seed);
        prop_assert_eq!(&a, &subsample_indices(n_rows, n, seed));
        prop_assert_eq!(a.len(), n.min(n_rows));
        prop_assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn manifest_preserves_order(ids in prop::collection::hash_set("[a-z]{1,8}", 1..20)) {
        let ids: Vec<String> = ids.into_iter().collect();
        let runs: Vec<String> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| format!(r#"{{"run_id":"{id}","hp_value":{i},"rank":{}}}"#, i + 1))
            .collect();
        let text = format!(r#"{{"axis_name":"x","ordered":true,"runs":[{}]}}"#, runs.join(","));
        let m = parse_manifest(&text).unwrap();
        let got: Vec<&str> = m.runs.iter().map(|r| r.run_id.as_str()).collect();
        prop_assert_eq!(got, ids.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn eckart_young_bound_monotone(m in matrix_strategy(12, 8)) {
        let len = m.n_rows().min(m.n_cols());
        let total = m.frobenius_sq();
        let mut prev = f64::INFINITY;
        for r in 0..=len {
            let ey = eckart_young_check(&m, r).unwrap();
            prop_assert!(ey.bound <= prev);
            prop_assert!((ey.achieved - ey.bound).abs() <= 1e-9 * total.max(1e-300));
            if r == 0 {
                prop_assert!(close(ey.bound, total, 1e-10, 1e-300));
            }
            prev = ey.bound;
        }
    }
}

#[test]
fn linear_maps_do_not_raise_rank() {
    use rankgauge::synth::{gaussian_matrix, planted_rank};
    let cfg = MetricConfig::for_dtype(Dtype::F64);
    for seed in 0..20 {
        let z = planted_rank(64, 32, 10, 0.0, seed);
        let w = gaussian_matrix(32, 16, 1000 + seed);
        let rank_of = |m: &EmbeddingMatrix| {
            classical_rank(&singular_values(m, SpectrumPath::Direct).unwrap(), &cfg)
        };
        let (rz, rw) = (rank_of(&z), rank_of(&w));
        assert_eq!(rz, 10);
        let zw = z.to_dmatrix() * w.to_dmatrix();
        let prod = EmbeddingMatrix::from_dmatrix(&zw).unwrap();
        assert!(rank_of(&prod) <= rz.min(rw));

        let b = gaussian_matrix(1, 16, 2000 + seed).to_dmatrix();
        let biased = &zw + DMatrix::from_fn(64, 16, |_, j| b[(0, j)]);
        let biased = EmbeddingMatrix::from_dmatrix(&biased).unwrap();
        assert!(rank_of(&biased) <= rz.min(rw) + 1);
    }
}
