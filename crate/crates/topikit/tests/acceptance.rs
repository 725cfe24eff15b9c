//! Acceptance gate: one test per criterion, each printing a PASS line and
//! enforcing its stated tolerance and runtime budget. Oracles here are
//! written independently of the library code paths they check.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topikit::classify::{evaluate_protocol, ModelSpec};
use topikit::cluster::{kmeans, purity, random_baseline_purity};
use topikit::coherence::{build_cooc, umass_topic, TopicCoherence};
use topikit::corpus::{preprocess, to_bow, Label, PreprocessConfig, TokenDoc, Vocabulary};
use topikit::deviation::evaluate;
use topikit::divergence::{divergence, DivergenceMeasure, MeasureKind};
use topikit::embedcmp::{group_delta, mean_pairwise_cosim};
use topikit::features::{build_aggregate_matrix, FeatureMatrix};
use topikit::lda::{InferConfig, LdaModel, TrainConfig};
use topikit::reduce::{nmf, pca, tsne, TsneConfig};
use topikit::stats::{mann_whitney_u, shapiro_wilk, t_test_ind, Alternative};
use topikit::synth::{generate, SynthSpec};

fn budget(name: &str, start: Instant, limit_secs: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < limit_secs,
        "{name}: runtime {elapsed:.1}s exceeds the {limit_secs}s budget"
    );
    println!("ACCEPTANCE {name}: PASS ({elapsed:.1}s)");
}

// ---------------------------------------------------------------------------
// 1. Divergence oracle equivalence
// ---------------------------------------------------------------------------

/// Brute-force reference for all seven measures, coded independently of the
/// divergence module (own floor/renormalize arithmetic).
fn oracle_divergence(kind: MeasureKind, p: &[f64], q: &[f64], eps: f64) -> f64 {
    let floor = |v: &[f64]| -> Vec<f64> {
        let raw: Vec<f64> = v.iter().map(|&x| if x < eps { eps } else { x }).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|&x| x / total).collect()
    };
    let kl = |a: &[f64], b: &[f64]| -> f64 {
        let fa = floor(a);
        let fb = floor(b);
        let mut s = 0.0;
        for i in 0..fa.len() {
            s += fa[i] * (fa[i] / fb[i]).ln();
        }
        s
    };
    match kind {
        MeasureKind::Cosine => {
            let mut dot = 0.0;
            let mut np = 0.0;
            let mut nq = 0.0;
            for i in 0..p.len() {
                dot += p[i] * q[i];
                np += p[i] * p[i];
                nq += q[i] * q[i];
            }
            1.0 - dot / (np.sqrt() * nq.sqrt())
        }
        MeasureKind::Chebyshev => {
            let mut best: f64 = 0.0;
            for i in 0..p.len() {
                let d = (p[i] - q[i]).abs();
                if d > best {
                    best = d;
                }
            }
            best
        }
        MeasureKind::Euclidean => {
            let mut s = 0.0;
            for i in 0..p.len() {
                s += (p[i] - q[i]) * (p[i] - q[i]);
            }
            s.sqrt()
        }
        MeasureKind::SquaredEuclidean => {
            let mut s = 0.0;
            for i in 0..p.len() {
                s += (p[i] - q[i]) * (p[i] - q[i]);
            }
            s
        }
        MeasureKind::Hellinger => {
            let mut s = 0.0;
            for i in 0..p.len() {
                let d = p[i].sqrt() - q[i].sqrt();
                s += d * d;
            }
            (s / 2.0).sqrt()
        }
        MeasureKind::KullbackLeibler => kl(p, q),
        MeasureKind::JensenShannon => {
            let z: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
            0.5 * (kl(p, &z) + kl(q, &z))
        }
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0f64..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|&x| x / total.max(1e-300)).collect()
}

#[test]
fn criterion_1_divergence_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let ln2 = std::f64::consts::LN_2;
    for _ in 0..10_000 {
        let m = rng.gen_range(2..=200);
        let p = random_simplex(&mut rng, m);
        let q = random_simplex(&mut rng, m);
        for kind in MeasureKind::ALL {
            let measure = DivergenceMeasure::new(kind);
            let got = divergence(measure, &p, &q).unwrap();
            let expected = oracle_divergence(kind, &p, &q, measure.epsilon);
            assert!(
                (got - expected).abs() <= 1e-12,
                "{kind}: {got} vs oracle {expected} at m={m}"
            );
        }
        let cheb = divergence(DivergenceMeasure::new(MeasureKind::Chebyshev), &p, &q).unwrap();
        let hell = divergence(DivergenceMeasure::new(MeasureKind::Hellinger), &p, &q).unwrap();
        let js = divergence(DivergenceMeasure::new(MeasureKind::JensenShannon), &p, &q).unwrap();
        assert!(cheb <= 1.0 + 1e-12);
        assert!(hell <= 1.0 + 1e-12);
        assert!(js <= ln2 + 1e-12);
    }
    budget("1 (divergence oracle equivalence)", start, 10.0);
}

// ---------------------------------------------------------------------------
// 2. UMass exactness
// ---------------------------------------------------------------------------

fn token_doc(id: usize, tokens: Vec<String>) -> TokenDoc {
    TokenDoc {
        id: format!("d{id}"),
        label: Label::Unlabeled,
        sentences: vec![tokens],
    }
}

/// Counting oracle: recounts D(x) and D(x, y) by scanning every document
/// per query, then sums the pair scores in specification order.
fn oracle_umass(docs: &[TokenDoc], top_words: &[String], eps: f64) -> Option<f64> {
    let doc_has = |doc: &TokenDoc, word: &str| doc.tokens().any(|t| t == word);
    let d_single = |word: &str| -> u64 { docs.iter().filter(|d| doc_has(d, word)).count() as u64 };
    let d_pair = |a: &str, b: &str| -> u64 {
        docs.iter()
            .filter(|d| doc_has(d, a) && doc_has(d, b))
            .count() as u64
    };
    let scoreable: Vec<&String> = top_words.iter().filter(|w| d_single(w) > 0).collect();
    if scoreable.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    for m in 1..scoreable.len() {
        for l in 0..m {
            total +=
                ((d_pair(scoreable[m], scoreable[l]) as f64 + eps) / d_single(scoreable[l]) as f64).ln();
        }
    }
    Some(total)
}

#[test]
fn criterion_2_umass_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    for corpus_idx in 0..100 {
        let vocab_size = rng.gen_range(5..=30);
        let n_docs = rng.gen_range(3..=50);
        let words: Vec<String> = (0..vocab_size).map(|i| format!("w{i}")).collect();
        let docs: Vec<TokenDoc> = (0..n_docs)
            .map(|d| {
                let len = rng.gen_range(1..=12);
                token_doc(
                    d,
                    (0..len).map(|_| words[rng.gen_range(0..vocab_size)].clone()).collect(),
                )
            })
            .collect();
        let m = rng.gen_range(2..=6.min(vocab_size));
        let mut top: Vec<String> = words.clone();
        for i in (1..top.len()).rev() {
            top.swap(i, rng.gen_range(0..=i));
        }
        top.truncate(m);
        let eps = [1.0, 0.5, 1e-6][corpus_idx % 3];

        let restrict = top.iter().cloned().collect();
        let cooc = build_cooc(&docs, &restrict).unwrap();
        cooc.check_invariants().unwrap();
        let got = umass_topic(&cooc, &top, eps);
        let expected = oracle_umass(&docs, &top, eps);
        match (got, expected) {
            (TopicCoherence::Score(g), Some(e)) => {
                assert!(g == e, "corpus {corpus_idx}: {g} != oracle {e} (bit-exact required)");
            }
            (TopicCoherence::Undefined, None) => {}
            other => panic!("corpus {corpus_idx}: mismatch {other:?}"),
        }
    }
    budget("2 (UMass exactness)", start, 5.0);
}

// ---------------------------------------------------------------------------
// 3. LDA recovery
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_lda_recovery() {
    let start = Instant::now();
    let spec = SynthSpec {
        k_true: 4,
        vocab_size: 40,
        docs_per_class: 200, // 400 docs total
        seed: 33,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec).unwrap();
    let prep = preprocess(&corpus, &PreprocessConfig::default()).unwrap();
    let bows: Vec<_> = prep.docs.iter().map(|d| to_bow(d.tokens(), &prep.vocab)).collect();
    let model = LdaModel::train(&bows, &prep.vocab, TrainConfig::new(4, 7).with_iters(150)).unwrap();

    // Every topic's top-5 words must come from one planted slice. Synth
    // words are "tw$(index)" with slices of vocab_size / k_true words.
    let slice_of = |word: &str| -> usize {
        let index: usize = word.trim_start_matches("tw").parse().expect("synth word");
        index / (spec.vocab_size / spec.k_true)
    };
    for topic in 0..4 {
        let top = model.top_words(topic, 5).unwrap();
        let slices: std::collections::BTreeSet<usize> = top.iter().map(|w| slice_of(w)).collect();
        assert_eq!(slices.len(), 1, "topic {topic} mixes slices: {top:?}");
    }

    // Held-out perplexity at most half the uniform-model value V.
    let heldout_corpus = generate(&SynthSpec { seed: 34, docs_per_class: 50, ..spec }).unwrap();
    let heldout_prep = preprocess(&heldout_corpus, &PreprocessConfig::default()).unwrap();
    let heldout: Vec<_> = heldout_prep
        .docs
        .iter()
        .map(|d| to_bow(d.tokens(), &prep.vocab))
        .collect();
    let ppl = model
        .perplexity(&heldout, InferConfig::new(5).with_iters(50))
        .unwrap();
    let v = prep.vocab.len() as f64;
    assert!(
        ppl <= 0.5 * v,
        "held-out perplexity {ppl:.2} above half the uniform value {v}"
    );
    budget("3 (LDA recovery)", start, 60.0);
}

// ---------------------------------------------------------------------------
// 4. Thematic-deviation direction
// ---------------------------------------------------------------------------

fn drift_pipeline(
    spec: &SynthSpec,
    n_set: &[usize],
    model_seed: u64,
) -> (Vec<TokenDoc>, Vocabulary, BTreeMap<usize, LdaModel>) {
    let corpus = generate(spec).unwrap();
    let prep = preprocess(&corpus, &PreprocessConfig::default()).unwrap();
    let bows: Vec<_> = prep.docs.iter().map(|d| to_bow(d.tokens(), &prep.vocab)).collect();
    let mut models = BTreeMap::new();
    for &n in n_set {
        let cfg = TrainConfig::new(n, model_seed + n as u64).with_iters(100);
        models.insert(n, LdaModel::train(&bows, &prep.vocab, cfg).unwrap());
    }
    (prep.docs, prep.vocab, models)
}

#[test]
fn criterion_4_thematic_deviation_direction() {
    let start = Instant::now();
    let n_set = [10, 20, 30, 40, 50];
    let infer = InferConfig::new(5).with_iters(40);
    let measure = DivergenceMeasure::new(MeasureKind::Chebyshev);

    let mut null_passes = 0;
    for seed in 1u64..=5 {
        // Drifted fake class vs drift-free real class; classes share the
        // topic pool so only the drift separates them.
        let spec = SynthSpec {
            docs_per_class: 300,
            drift_prob: 1.0,
            real_drift_prob: 0.0,
            class_topic_split: false,
            seed,
            ..SynthSpec::default()
        };
        let (docs, _, models) = drift_pipeline(&spec, &n_set, 700 + seed * 101);
        let report = evaluate(&docs, &models, measure, 5, infer).unwrap();
        for n in &report.n_set {
            let s = &report.per_n_stats[n];
            assert!(
                s.fake.mean > s.real.mean,
                "seed {seed}, N={n}: fake {:.4} <= real {:.4}",
                s.fake.mean,
                s.real.mean
            );
        }
        assert!(
            report.t_test.p_value < 0.01,
            "seed {seed}: t-test p {:.4} >= 0.01",
            report.t_test.p_value
        );

        // Null control: no drift anywhere; the classes are exchangeable.
        let null_spec = SynthSpec {
            drift_prob: 0.0,
            seed: seed + 60,
            ..spec
        };
        let (docs, _, models) = drift_pipeline(&null_spec, &n_set, 900 + seed * 77);
        let null_report = evaluate(&docs, &models, measure, 5, infer).unwrap();
        if null_report.t_test.p_value > 0.05 {
            null_passes += 1;
        }
    }
    assert!(
        null_passes >= 4,
        "null control rejected too often: only {null_passes}/5 seeds gave p > 0.05"
    );
    budget("4 (thematic-deviation direction)", start, 300.0);
}

// ---------------------------------------------------------------------------
// 5. Statistical-test oracles
// ---------------------------------------------------------------------------

/// Independent exact Mann-Whitney oracle: explicitly enumerates all
/// C(n1+n2, n1) rank arrangements.
fn oracle_exact_u_pvalue(n1: usize, n2: usize, u_obs: f64, alternative: Alternative) -> f64 {
    let n = n1 + n2;
    fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        if n < k {
            return Vec::new();
        }
        let mut out = combos(n - 1, k - 1)
            .into_iter()
            .map(|mut c| {
                c.push(n - 1);
                c
            })
            .collect::<Vec<_>>();
        out.extend(combos(n - 1, k));
        out
    }
    let arrangements = combos(n, n1);
    let total = arrangements.len() as f64;
    let u_of = |ranks: &[usize]| -> f64 {
        let r1: usize = ranks.iter().map(|r| r + 1).sum();
        r1 as f64 - (n1 * (n1 + 1)) as f64 / 2.0
    };
    let us: Vec<f64> = arrangements.iter().map(|a| u_of(a)).collect();
    let count = |pred: &dyn Fn(f64) -> bool| us.iter().filter(|&&u| pred(u)).count() as f64;
    match alternative {
        Alternative::Less => count(&|u| u <= u_obs) / total,
        Alternative::Greater => count(&|u| u >= u_obs) / total,
        Alternative::TwoSided => {
            let max_u = (n1 * n2) as f64;
            let mirror = max_u - u_obs;
            let (lo, hi) = if u_obs <= mirror { (u_obs, mirror) } else { (mirror, u_obs) };
            if lo == hi {
                1.0
            } else {
                ((count(&|u| u <= lo) + count(&|u| u >= hi)) / total).min(1.0)
            }
        }
    }
}

#[test]
fn criterion_5_statistical_test_oracles() {
    let start = Instant::now();

    // Exact Mann-Whitney equals the enumeration oracle for every tie-free
    // rank arrangement with n1 + n2 <= 10, for all three alternatives.
    for n1 in 1..=9usize {
        for n2 in 1..=(10 - n1) {
            // Every distinct arrangement of ranks is realized by assigning
            // the rank values themselves as the sample values.
            fn assignments(n: usize, k: usize) -> Vec<Vec<usize>> {
                if k == 0 {
                    return vec![Vec::new()];
                }
                if n < k {
                    return Vec::new();
                }
                let mut out = assignments(n - 1, k - 1)
                    .into_iter()
                    .map(|mut c| {
                        c.push(n - 1);
                        c
                    })
                    .collect::<Vec<_>>();
                out.extend(assignments(n - 1, k));
                out
            }
            for arrangement in assignments(n1 + n2, n1) {
                let x: Vec<f64> = arrangement.iter().map(|&r| (r + 1) as f64).collect();
                let chosen: std::collections::BTreeSet<usize> =
                    arrangement.iter().copied().collect();
                let y: Vec<f64> = (0..n1 + n2)
                    .filter(|r| !chosen.contains(r))
                    .map(|r| (r + 1) as f64)
                    .collect();
                for alternative in
                    [Alternative::Less, Alternative::Greater, Alternative::TwoSided]
                {
                    let got = mann_whitney_u(&x, &y, alternative).unwrap();
                    assert!(got.exact, "exact path expected for n={}", n1 + n2);
                    let expected =
                        oracle_exact_u_pvalue(n1, n2, got.statistic, alternative);
                    assert!(
                        (got.p_value - expected).abs() < 1e-12,
                        "n1={n1} n2={n2} {alternative:?}: {} vs oracle {expected}",
                        got.p_value
                    );
                }
            }
        }
    }

    // t-test vs a high-precision reference (20 frozen cases).
    let t_cases: Vec<(Vec<f64>, Vec<f64>, bool, f64)> = vec![
        (vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0], true, 0.28786413472669081),
        (vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0], false, 0.28786413472669081),
        (vec![1.5, 2.5, 3.5, 4.5], vec![2.0, 3.0, 4.0], true, 1.0),
        (vec![10.0, 12.0, 9.0, 11.0, 10.0], vec![13.0, 15.0, 14.0, 16.0, 12.0], true, 0.0033008040549179002),
        (vec![10.0, 12.0, 9.0, 11.0, 10.0], vec![13.0, 15.0, 14.0, 16.0, 12.0], false, 0.0040544986245770586),
        (vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6], vec![0.15, 0.25, 0.35], true, 0.42483674088753909),
        (vec![5.0, 5.0, 6.0, 7.0], vec![5.0, 6.0, 6.0, 7.0], true, 0.7048525449095584),
        (vec![-1.0, 0.0, 1.0, 2.0], vec![4.0, 5.0, 6.0, 7.0], true, 0.0015474212145409386),
        (vec![-1.0, 0.0, 1.0, 2.0], vec![4.0, 5.0, 6.0, 7.0], false, 0.0015474212145409386),
        (vec![100.0, 101.0, 99.0, 98.0, 102.0, 103.0], vec![100.5, 101.5, 99.5], false, 1.0),
        (
            vec![-1.460126, -0.146841, -1.097741, -0.432333, -0.420599, -1.192474, -0.655528, -0.286607, 2.83775, 0.649741, -1.917656],
            vec![0.094261, 3.761182, 0.021804, -1.280125, 2.004401],
            false,
            0.23059714720134269,
        ),
        (
            vec![1.100549, -0.088195, 0.705072, 0.106495, 0.910899, -1.095446, 1.162306, 0.484631, 0.29389, -0.230115, 0.182416],
            vec![2.001891, 0.686172, -0.495636, 1.425871, 0.33587, 2.582967, 0.009618, -1.596101, -0.018022, 1.519216, 0.381064],
            true,
            0.47499551430198317,
        ),
        (
            vec![-0.38304, 0.73407, -0.445016, 0.891064, -0.102603],
            vec![4.164125, -0.168187, 3.550431, -2.369141, -0.046624, 0.529244],
            false,
            0.4727762585729427,
        ),
        (
            vec![-1.638984, 0.990005, 0.938539, 1.990519, 1.780362, 0.273501, -1.669734, -0.815112, -1.545956],
            vec![0.624167, 0.383341, -0.00252, -1.133174, 2.57168, 0.631015],
            true,
            0.52259401012810569,
        ),
        (
            vec![-0.41718, -1.122358, 0.242429, -0.394246, 0.213562],
            vec![3.783517, 1.256641, 0.768498, 1.402449],
            false,
            0.045658781958424245,
        ),
        (
            vec![-0.162133, -0.904553, -1.102798, 1.236159, -0.893615, -0.488332, -0.73266, 0.299456, -0.204737, -0.420012],
            vec![-0.25795, -3.258148, -2.149643, 1.979588, 1.247935],
            true,
            0.84280357627476377,
        ),
        (
            vec![1.621538, 1.400327, 0.732584, -0.204441, -0.670964, 0.080792, 0.551931, 0.070236, -1.610289],
            vec![1.741453, 1.560386, 0.51403, -0.513427],
            false,
            0.36834907662772737,
        ),
        (
            vec![-0.849418, -1.639488, -0.195939, 2.409271, -1.019707, 0.168026, -1.217941, -0.26459, -1.157054, -1.130692],
            vec![-1.52568, 0.473461, 0.594153, 0.853296, 0.732203, -1.550032, -1.111289],
            true,
            0.63755198447384975,
        ),
        (
            vec![1.500382, -1.066998, -0.653892, 1.804739, -0.309381, 0.827662, 0.617729, -1.84204, 0.64282, 0.994293, -2.66578],
            vec![0.207284, 1.017808, 0.697738, 1.487135, -2.08956, -1.283878],
            false,
            0.97842440411361498,
        ),
        (
            vec![1.789163, 1.289171, 1.453209, 0.934374, -0.377337, -0.75202, -0.746486],
            vec![2.982729, -2.159869, -1.062626, 0.571302, -0.249573, 0.221155, -1.74247],
            true,
            0.3713680968256875,
        ),
    ];
    assert_eq!(t_cases.len(), 20);
    for (i, (x, y, equal_var, p_ref)) in t_cases.iter().enumerate() {
        let r = t_test_ind(x, y, *equal_var, Alternative::TwoSided).unwrap();
        assert!(
            (r.p_value - p_ref).abs() < 1e-6,
            "t-test case {i}: p {} vs reference {p_ref}",
            r.p_value
        );
    }

    // Shapiro-Wilk: exact W for the arithmetic 3-sample; power against
    // uniforms at n = 200.
    let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
    assert!((r.statistic - 1.0).abs() < 1e-12, "W = {}", r.statistic);
    let mut rejections = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let sample: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0f64..1.0)).collect();
        if shapiro_wilk(&sample).unwrap().p_value < 0.05 {
            rejections += 1;
        }
    }
    assert!(rejections >= 95, "uniform rejected in only {rejections}/100 trials");

    budget("5 (statistical-test oracles)", start, 30.0);
}

// ---------------------------------------------------------------------------
// 6 & 7 share the synthetic drift corpus and its aggregate features.
// ---------------------------------------------------------------------------

struct DetectionFixture {
    matrix: FeatureMatrix,
}

fn detection_fixture() -> &'static DetectionFixture {
    static FIXTURE: OnceLock<DetectionFixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        // Class-distinct topic pools plus full drift on the fake side: the
        // geometry the detection chapters exploit.
        let spec = SynthSpec {
            k_true: 2,
            vocab_size: 40,
            docs_per_class: 100,
            drift_prob: 1.0,
            class_topic_split: true,
            seed: 9,
            ..SynthSpec::default()
        };
        let corpus = generate(&spec).unwrap();
        let prep = preprocess(&corpus, &PreprocessConfig::default()).unwrap();
        let bows: Vec<_> = prep.docs.iter().map(|d| to_bow(d.tokens(), &prep.vocab)).collect();
        let mut models = BTreeMap::new();
        for n in [10usize, 20, 30, 40, 50] {
            let cfg = TrainConfig::new(n, 500 + n as u64).with_iters(100);
            models.insert(n, LdaModel::train(&bows, &prep.vocab, cfg).unwrap());
        }
        let infer = InferConfig::new(5).with_iters(40);
        let matrix = build_aggregate_matrix(&prep.docs, &models, 5, infer).unwrap();
        DetectionFixture { matrix }
    })
}

#[test]
fn criterion_6_clustering() {
    let start = Instant::now();

    // Purity equals an independent hand-count oracle on random pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(6001);
    for _ in 0..1000 {
        let n = rng.gen_range(1..40);
        let assignments: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let got = purity(&assignments, &labels).unwrap();
        // Oracle: per-cluster tallies via nested loops.
        let mut majority_sum = 0usize;
        for cluster in 0..5 {
            let mut best = 0usize;
            for label in 0..3u8 {
                let count = (0..n)
                    .filter(|&i| assignments[i] == cluster && labels[i] == label)
                    .count();
                if count > best {
                    best = count;
                }
            }
            majority_sum += best;
        }
        let expected = majority_sum as f64 / n as f64;
        assert!(got == expected, "purity {got} != oracle {expected}");
    }

    // Two separated blobs cluster perfectly.
    let mut blob_points = Vec::new();
    let mut blob_labels = Vec::new();
    for i in 0..25 {
        let jitter = i as f64 * 0.004;
        blob_points.push(vec![jitter, 0.1 - jitter]);
        blob_labels.push("a");
        blob_points.push(vec![10.0 + jitter, 10.0 - jitter]);
        blob_labels.push("b");
    }
    let blob_result = kmeans(&blob_points, 2, 500, 10, 66).unwrap();
    assert_eq!(purity(&blob_result.assignments, &blob_labels).unwrap(), 1.0);

    // Random baseline on balanced labels.
    let balanced: Vec<&str> = (0..500).map(|i| if i % 2 == 0 { "f" } else { "r" }).collect();
    let baseline = random_baseline_purity(&balanced, 1000, 17).unwrap();
    assert!(
        (0.48..=0.54).contains(&baseline),
        "balanced baseline {baseline} outside [0.48, 0.54]"
    );

    // Aggregate features -> t-SNE 2-D (perplexity 30) -> K-means purity.
    let fixture = detection_fixture();
    let mut tsne_cfg = TsneConfig::new(30.0, 7);
    tsne_cfg.iters = 500;
    let embedding = tsne(&fixture.matrix.rows, &tsne_cfg).unwrap();
    let labels: Vec<&str> = fixture.matrix.labels.iter().map(|l| l.as_str()).collect();
    let clusters = kmeans(&embedding.embedding, 2, 500, 10, 3).unwrap();
    let tsne_purity = purity(&clusters.assignments, &labels).unwrap();
    let class_baseline = random_baseline_purity(&labels, 1000, 5).unwrap();
    assert!(
        tsne_purity >= 0.85,
        "aggregate+tsne purity {tsne_purity:.4} below 0.85"
    );
    assert!(
        tsne_purity > class_baseline,
        "purity {tsne_purity:.4} does not beat baseline {class_baseline:.4}"
    );

    budget("6 (clustering)", start, 180.0);
}

#[test]
fn criterion_7_classification() {
    let start = Instant::now();
    let fixture = detection_fixture();
    let y: Vec<bool> = fixture
        .matrix
        .labels
        .iter()
        .map(|l| *l == Label::Fake)
        .collect();

    let logistic =
        evaluate_protocol(&fixture.matrix.rows, &y, ModelSpec::Logistic { l2_reg: 1.0 }, 3)
            .unwrap();
    assert!(
        logistic.cv.accuracy >= 0.90,
        "logistic cv accuracy {:.4} below 0.90",
        logistic.cv.accuracy
    );

    // Label-shuffle control.
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut shuffled = y.clone();
    for i in (1..shuffled.len()).rev() {
        let j = rng.gen_range(0..=i);
        shuffled.swap(i, j);
    }
    let control =
        evaluate_protocol(&fixture.matrix.rows, &shuffled, ModelSpec::Logistic { l2_reg: 1.0 }, 3)
            .unwrap();
    assert!(
        control.cv.accuracy <= 0.60,
        "shuffle control accuracy {:.4} above 0.60",
        control.cv.accuracy
    );

    let knn = evaluate_protocol(&fixture.matrix.rows, &y, ModelSpec::Knn { k: 20 }, 3).unwrap();
    assert!(
        (knn.cv.accuracy - logistic.cv.accuracy).abs() <= 0.05,
        "knn {:.4} not within 0.05 of logistic {:.4}",
        knn.cv.accuracy,
        logistic.cv.accuracy
    );

    budget("7 (classification)", start, 120.0);
}

// ---------------------------------------------------------------------------
// 8. Algorithm 1 math
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_group_similarity_math() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8008);

    // Brute-force oracle on 1000 random matrices.
    for _ in 0..1000 {
        let n = rng.gen_range(2..8);
        let dim = rng.gen_range(1..6);
        let matrix: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(0.1f64..2.0)).collect())
            .collect();
        let got = mean_pairwise_cosim(&matrix).unwrap();
        for i in 0..n {
            let mut total = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut dot = 0.0;
                let mut ni = 0.0;
                let mut nj = 0.0;
                for c in 0..dim {
                    dot += matrix[i][c] * matrix[j][c];
                    ni += matrix[i][c] * matrix[i][c];
                    nj += matrix[j][c] * matrix[j][c];
                }
                total += dot / (ni.sqrt() * nj.sqrt());
            }
            let expected = total / (n - 1) as f64;
            assert!(
                (got[i] - expected).abs() <= 1e-12,
                "row {i}: {} vs oracle {expected}",
                got[i]
            );
        }
    }

    // Antisymmetry is exact.
    let a: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..5).map(|_| rng.gen_range(0.1f64..2.0)).collect())
        .collect();
    let b: Vec<Vec<f64>> = (0..7)
        .map(|_| (0..5).map(|_| rng.gen_range(0.1f64..2.0)).collect())
        .collect();
    let ab = group_delta(&a, &b, Alternative::TwoSided).unwrap();
    let ba = group_delta(&b, &a, Alternative::TwoSided).unwrap();
    assert_eq!(ab.delta_a, -ba.delta_a);
    assert_eq!(ab.delta_med, -ba.delta_med);

    // Tight cone vs orthogonal basis: large positive delta, small p.
    let dim = 24;
    let cone: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            let mut v = vec![0.0; dim];
            v[0] = 1.0;
            for x in v.iter_mut().skip(1) {
                *x = rng.gen_range(-0.01..0.01);
            }
            v
        })
        .collect();
    let ortho: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let mut v = vec![0.0; dim];
            v[i + 1] = 1.0;
            v
        })
        .collect();
    let cmp = group_delta(&cone, &ortho, Alternative::Greater).unwrap();
    assert!(cmp.delta_a > 0.5, "delta_a {:.4}", cmp.delta_a);
    assert!(cmp.test.p_value < 0.01, "one-sided p {:.4e}", cmp.test.p_value);

    budget("8 (group-similarity math)", start, 10.0);
}

// ---------------------------------------------------------------------------
// 9. Reduction numerics
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_reduction_numerics() {
    let start = Instant::now();

    // PCA on a planted rank-1 dataset.
    let direction = [0.6, -0.3, 0.74];
    let rank1: Vec<Vec<f64>> = (0..30)
        .map(|i| {
            let t = i as f64 - 14.5;
            direction.iter().map(|d| d * t).collect()
        })
        .collect();
    let result = pca(&rank1, 2).unwrap();
    assert!(
        (result.explained_variance_ratio[0] - 1.0).abs() <= 1e-9,
        "rank-1 explained variance {}",
        result.explained_variance_ratio[0]
    );

    // NMF objective monotonicity on 50 random non-negative matrices.
    let mut rng = ChaCha8Rng::seed_from_u64(9009);
    for trial in 0..50 {
        let n = rng.gen_range(4..12);
        let m = rng.gen_range(3..10);
        let d = rng.gen_range(1..=3.min(n.min(m)));
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(0.0f64..5.0)).collect())
            .collect();
        let result = nmf(&x, d, 120, trial).unwrap();
        for w in result.objective_trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-10 * w[0].max(1.0),
                "trial {trial}: objective rose {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    // t-SNE entropy calibration on a 200-point set.
    let points: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..8).map(|_| rng.gen_range(-2.0f64..2.0)).collect())
        .collect();
    let perplexity = 25.0;
    let mut cfg = TsneConfig::new(perplexity, 1);
    cfg.iters = 30; // calibration happens before the descent
    let result = tsne(&points, &cfg).unwrap();
    assert!(!result.clamped);
    let target = perplexity.ln();
    for (i, h) in result.point_entropies.iter().enumerate() {
        assert!(
            (h - target).abs() <= 1e-4,
            "point {i}: |H - ln(perplexity)| = {:.2e}",
            (h - target).abs()
        );
    }

    budget("9 (reduction numerics)", start, 120.0);
}

// ---------------------------------------------------------------------------
// 10. End-to-end reproducibility through the binary
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_end_to_end_reproducibility() {
    let start = Instant::now();
    let binary = env!("CARGO_BIN_EXE_topikit");

    let config_toml = r#"
[run]
seed = 77
out_dir = "out"

[synth]
docs_per_class = 40
drift_prob = 1.0
k_true = 2

[lda]
n_set = [4, 8]
train_iters = 60
infer_iters = 30

[reduce]
method = "pca"

[cluster]
baseline_trials = 200
"#;

    let chain: Vec<Vec<&str>> = vec![
        vec!["synth"],
        vec!["preprocess"],
        vec!["lda-train"],
        vec!["deviate"],
        vec!["features"],
        vec!["reduce", "--input", "features_aggregate300.csv"],
        vec!["cluster", "--input", "reduced_pca.csv"],
        vec!["classify", "--input", "features_aggregate300.csv"],
    ];

    let run_chain = |workdir: &std::path::Path| {
        std::fs::write(workdir.join("config.toml"), config_toml).unwrap();
        for args in &chain {
            let output = std::process::Command::new(binary)
                .args(args.as_slice())
                .arg("--config")
                .arg("config.toml")
                .current_dir(workdir)
                .output()
                .expect("binary runs");
            assert!(
                output.status.success(),
                "step {:?} failed: {}",
                args,
                String::from_utf8_lossy(&output.stderr)
            );
        }
    };

    // Collect every CSV/JSON report under out/, keyed by relative path.
    let snapshot = |workdir: &std::path::Path| -> std::collections::BTreeMap<String, Vec<u8>> {
        let mut files = std::collections::BTreeMap::new();
        let out = workdir.join("out");
        let mut stack = vec![out.clone()];
        while let Some(dir) = stack.pop() {
            for entry in std::fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
                    if matches!(ext, "csv" | "json" | "jsonl" | "svg") {
                        let rel = path.strip_prefix(&out).unwrap().to_string_lossy().into_owned();
                        files.insert(rel, std::fs::read(&path).unwrap());
                    }
                }
            }
        }
        files
    };

    let dir_a = tempfile::tempdir().unwrap();
    run_chain(dir_a.path());
    let first = snapshot(dir_a.path());
    assert!(first.len() >= 10, "expected a full artifact set, got {}", first.len());

    // Rerun in the same directory: artifacts must be rewritten identically.
    run_chain(dir_a.path());
    let second = snapshot(dir_a.path());
    assert_eq!(first.len(), second.len());
    for (path, bytes) in &first {
        assert_eq!(
            bytes,
            &second[path],
            "artifact {path} changed between identical runs"
        );
    }

    // And a fresh directory reproduces the same bytes.
    let dir_b = tempfile::tempdir().unwrap();
    run_chain(dir_b.path());
    let fresh = snapshot(dir_b.path());
    for (path, bytes) in &first {
        assert_eq!(bytes, &fresh[path], "artifact {path} differs across directories");
    }

    budget("10 (end-to-end reproducibility)", start, 600.0);
}
