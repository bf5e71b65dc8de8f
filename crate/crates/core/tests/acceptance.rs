//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with its runtime. Oracles here are independent of the
//! library's implementation paths: brute-force clustering is reimplemented
//! locally and expected values are frozen from hand derivations.

use clone_lattice::ast::NUM_KINDS;
use clone_lattice::cluster::lsh_cluster;
use clone_lattice::constraints::{
    check_equivalence, match_variables, simplify, Atom, ConstraintSet, LinExpr, NormAtom,
    PathCondition, SymVar, VariableMatching, Verdict,
};
use clone_lattice::depgraph::{build_dependency_graph, taint_pointer, VarRole};
use clone_lattice::error::EquivError;
use clone_lattice::feedback::{
    apply_feedback, run_until_convergence, verify_pair, ConvergenceConfig, FeedbackParams,
    PairVerdict, VerifyOutcome,
};
use clone_lattice::parser::{enumerate_pointers, parse_translation_unit};
use clone_lattice::pipeline::{load_corpus, run_pipeline, slice_corpus, PipelineConfig};
use clone_lattice::slicer::{isolate, PointerSlice};
use clone_lattice::vectors::{
    cluster_threshold, euclidean_distance, hamming_distance, vectorize, FeatureVector,
    WeightedVector,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

fn fixtures(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn report_line(id: u32, name: &str, started: Instant, limit: Duration, failures: &[String]) {
    let elapsed = started.elapsed();
    let status = if failures.is_empty() && elapsed <= limit {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "ACCEPTANCE {id} ({name}): {status} [{:.2}s / limit {:.0}s]",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    for f in failures {
        println!("    - {f}");
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
    assert!(
        elapsed <= limit,
        "criterion {id} exceeded its runtime limit: {elapsed:?} > {limit:?}"
    );
}

fn micro_slices() -> Vec<PointerSlice> {
    let corpus = load_corpus(&fixtures("micro")).unwrap();
    slice_corpus(&corpus).slices
}

fn slice_by_id<'a>(slices: &'a [PointerSlice], id_part: &str) -> &'a PointerSlice {
    slices
        .iter()
        .find(|s| s.id().contains(id_part))
        .unwrap_or_else(|| panic!("no slice matching {id_part}"))
}

/// Criterion 1: the worked nine-dimensional example — clustered at
/// S=0.75 before feedback, eliminated after feedback with delta=2.
#[test]
fn acceptance_1_worked_example() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let vi = WeightedVector::new(FeatureVector::from_counts(
        &[7, 2, 2, 2, 0, 1, 1, 1, 1],
        "worked/a",
        999,
    ));
    let vj = WeightedVector::new(FeatureVector::from_counts(
        &[8, 1, 1, 2, 1, 1, 1, 1, 1],
        "worked/b",
        999,
    ));
    let distance = euclidean_distance(&vi.weighted, &vj.weighted).unwrap();
    if (distance - 2.0).abs() > 1e-9 {
        failures.push(format!("pre-feedback distance {distance} != 2.0"));
    }
    let threshold = cluster_threshold(0.75, &vi.base, &vj.base);
    if (threshold - 8.5f64.sqrt()).abs() > 1e-9 || (threshold - 2.9155).abs() > 1e-3 {
        failures.push(format!("threshold {threshold} != sqrt(8.5)"));
    }
    if distance > threshold {
        failures.push("worked example did not cluster at S=0.75".into());
    }
    let clusters = lsh_cluster(&[vi.clone(), vj.clone()], 0.75, 20, 42);
    if clusters.len() != 1 || clusters[0].members != vec![0, 1] {
        failures.push(format!("expected one cluster of 2, got {clusters:?}"));
    }

    let (oi, oj) = apply_feedback(
        &vi,
        &vj,
        None,
        PairVerdict::FalsePositive,
        0.75,
        &FeedbackParams::default(),
        1,
    )
    .expect("separable");
    let after = euclidean_distance(&oi.weighted, &oj.weighted).unwrap();
    if (after - 4.0).abs() > 1e-9 {
        failures.push(format!("post-feedback distance {after} != 4.0"));
    }
    if after <= threshold {
        failures.push("feedback failed to push the pair out".into());
    }
    if lsh_cluster(&[oi, oj], 0.75, 20, 42).len() != 0 {
        failures.push("pair still clusters after feedback".into());
    }

    report_line(1, "worked example", started, Duration::from_secs(1), &failures);
}

/// Criterion 2: fixture verdicts and the exact related-variable sets.
#[test]
fn acceptance_2_fixture_verdicts() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let slices = micro_slices();

    let expectations: [(&str, &[&str]); 4] = [
        ("mgau_eval:active", &["j"]),
        ("lextree_hmm_histbin:list", &["i", "lextree->n_active"]),
        (
            "fe_spec_magnitude_loop1:in",
            &["wrap", "j", "data_len"],
        ),
        ("fe_spec_magnitude_loop2:in", &["j", "fftsize"]),
    ];
    for (id, expected) in expectations {
        let slice = slice_by_id(&slices, id);
        let got: Vec<&str> = slice.related.variables.iter().map(String::as_str).collect();
        if got != expected {
            failures.push(format!("{id}: related {got:?} != {expected:?}"));
        }
    }

    let verdict = |a: &str, b: &str| -> VerifyOutcome {
        verify_pair(slice_by_id(&slices, a), slice_by_id(&slices, b), 2, 64)
    };
    let tp = verdict("dict2pid_dump:mdef->sseq", "gc_compute_closest_cw:gs->codeword");
    if tp != VerifyOutcome::TrueClone {
        failures.push(format!("true-positive pair verified as {tp:?}"));
    }
    let fp1 = verdict("mgau_eval:active", "lextree_hmm_histbin:list");
    if fp1 != VerifyOutcome::FalsePositive {
        failures.push(format!("mgau/lextree pair verified as {fp1:?}"));
    }
    let fp2 = verdict("fe_spec_magnitude_loop1:in", "fe_spec_magnitude_loop2:in");
    if fp2 != VerifyOutcome::FalsePositive {
        failures.push(format!("loop1/loop2 pair verified as {fp2:?}"));
    }

    report_line(2, "fixture verdicts", started, Duration::from_secs(5), &failures);
}

/// Criterion 3: slicing detects strictly more exact clones than whole
/// functions, and every with-slicing pair at S=1.0 verifies TrueClone.
#[test]
fn acceptance_3_slicing_uplift() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let base = PipelineConfig {
        corpus_dir: fixtures("micro"),
        similarity: 1.0,
        ..PipelineConfig::default()
    };
    let sliced = run_pipeline(&base).unwrap();
    let unsliced = run_pipeline(&PipelineConfig {
        no_slicing: true,
        ..base.clone()
    })
    .unwrap();
    if sliced.corpus.functions < 10 {
        failures.push(format!(
            "micro corpus has only {} functions",
            sliced.corpus.functions
        ));
    }
    if sliced.clone_pair_count() <= unsliced.clone_pair_count() {
        failures.push(format!(
            "slicing found {} pairs, baseline {}",
            sliced.clone_pair_count(),
            unsliced.clone_pair_count()
        ));
    }

    // every with-slicing pair at S=1.0 must verify TrueClone
    let slices = micro_slices();
    let by_id: BTreeMap<String, &PointerSlice> =
        slices.iter().map(|s| (s.id(), s)).collect();
    for pair in &sliced.clone_pairs {
        let a = by_id[&pair.a.id];
        let b = by_id[&pair.b.id];
        let outcome = verify_pair(a, b, 2, 64);
        if outcome != VerifyOutcome::TrueClone {
            failures.push(format!(
                "S=1.0 pair ({}, {}) verified as {outcome:?}",
                pair.a.id, pair.b.id
            ));
        }
    }

    report_line(3, "slicing uplift", started, Duration::from_secs(10), &failures);
}

/// Criterion 4: on the FP-seeded corpus at S=0.70, convergence eliminates
/// every verified false positive within 20 iterations.
#[test]
fn acceptance_4_fp_elimination() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let corpus = load_corpus(&fixtures("fpseed")).unwrap();
    let slice_set = slice_corpus(&corpus);
    let vectors: Vec<WeightedVector> = slice_set
        .slices
        .iter()
        .map(|s| {
            let mut v = vectorize(&s.slice_tree);
            v.slice_ref.id = s.id();
            v.slice_ref.token_count = s.token_count();
            WeightedVector::new(v)
        })
        .collect();
    let cfg = ConvergenceConfig {
        similarity: 0.70,
        min_tokens: 20,
        max_iterations: 20,
        sample_k: 2,
        seed: 42,
        unroll_bound: 2,
        domain_radius: 64,
        params: FeedbackParams::default(),
    };
    let outcome = run_until_convergence(&slice_set.slices, vectors, &cfg);

    let fp_verified = outcome
        .verified
        .iter()
        .filter(|p| p.outcome == VerifyOutcome::FalsePositive)
        .count();
    if fp_verified < 5 {
        failures.push(format!("only {fp_verified} FP pairs were verified (seeded 5)"));
    }
    if outcome.log.len() > 20 {
        failures.push(format!("took {} iterations", outcome.log.len()));
    }
    if !outcome.converged {
        failures.push("loop did not converge".into());
    }
    if outcome.nonseparable + outcome.skipped > 1 {
        failures.push(format!(
            "{} nonseparable + {} skipped exceeds 1",
            outcome.nonseparable, outcome.skipped
        ));
    }
    // no verified FP pair may remain within its pairwise threshold
    let index_of: BTreeMap<&str, usize> = outcome
        .vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id(), i))
        .collect();
    for pair in &outcome.verified {
        if pair.outcome != VerifyOutcome::FalsePositive {
            continue;
        }
        let (a, b) = (index_of[pair.a.as_str()], index_of[pair.b.as_str()]);
        let d = outcome.vectors[a].distance_to(&outcome.vectors[b]);
        let t = cluster_threshold(0.70, &outcome.vectors[a].base, &outcome.vectors[b].base);
        if d <= t {
            failures.push(format!(
                "verified FP ({}, {}) remains clustered: d={d:.3} <= T={t:.3}",
                pair.a, pair.b
            ));
        }
    }
    // and the final clusters contain no verifiable false positive at all
    for cluster in &outcome.clusters {
        for (pos, &a) in cluster.members.iter().enumerate() {
            for &b in &cluster.members[pos + 1..] {
                let d = outcome.vectors[a].distance_to(&outcome.vectors[b]);
                let t =
                    cluster_threshold(0.70, &outcome.vectors[a].base, &outcome.vectors[b].base);
                if d > t {
                    continue;
                }
                let v = verify_pair(&slice_set.slices[a], &slice_set.slices[b], 2, 64);
                if v == VerifyOutcome::FalsePositive {
                    failures.push(format!(
                        "unresolved FP in final clusters: ({}, {})",
                        outcome.vectors[a].id(),
                        outcome.vectors[b].id()
                    ));
                }
            }
        }
    }

    report_line(4, "fp elimination", started, Duration::from_secs(60), &failures);
}

// ---- criterion 5 machinery ----

fn random_linexpr(rng: &mut ChaCha8Rng, vars: &[SymVar]) -> LinExpr {
    let mut expr = LinExpr::constant(rng.random_range(-16..=16));
    for v in vars {
        let coeff = rng.random_range(-4..=4i64);
        if coeff != 0 {
            expr = expr.add(&LinExpr::variable(v.clone()).scale(coeff));
        }
    }
    expr
}

fn random_set(rng: &mut ChaCha8Rng, var_count: usize) -> ConstraintSet {
    let names = ["x", "y", "z"];
    let roles = [VarRole::Index, VarRole::Bound, VarRole::BaseOffset];
    let vars: Vec<SymVar> = names[..var_count]
        .iter()
        .map(|n| SymVar::Var((*n).to_string()))
        .collect();
    let symbolic_vars = names[..var_count]
        .iter()
        .zip(roles)
        .map(|(n, r)| ((*n).to_string(), r))
        .collect();
    let n_paths = rng.random_range(1..=3usize);
    let mut paths = std::collections::BTreeSet::new();
    for _ in 0..n_paths {
        let n_atoms = rng.random_range(1..=4usize);
        let atoms: Vec<NormAtom> = (0..n_atoms)
            .map(|_| {
                let expr = random_linexpr(rng, &vars);
                if rng.random_range(0..8u32) == 0 {
                    Atom::eq(expr)
                } else {
                    Atom::le(expr)
                }
            })
            .collect();
        if let Some(path) = PathCondition::new(atoms) {
            paths.insert(path);
        }
    }
    ConstraintSet {
        symbolic_vars,
        paths,
    }
}

/// Renamed copy of a set (suffix renaming preserves first-use order and
/// roles, so the derived matching is the true bijection).
fn renamed_copy(cs: &ConstraintSet, tag: usize) -> (ConstraintSet, VariableMatching) {
    let mut map = BTreeMap::new();
    let mut pairs = Vec::new();
    for (name, _) in &cs.symbolic_vars {
        let fresh = format!("{name}_{tag}");
        map.insert(SymVar::Var(name.clone()), SymVar::Var(fresh.clone()));
        pairs.push((SymVar::Var(name.clone()), SymVar::Var(fresh)));
    }
    let renamed = ConstraintSet {
        symbolic_vars: cs
            .symbolic_vars
            .iter()
            .map(|(n, r)| (format!("{n}_{tag}"), *r))
            .collect(),
        ..cs.rename(&map)
    };
    (renamed, VariableMatching { pairs })
}

/// Independent exhaustive-agreement oracle over the bounded domain.
fn sets_agree_on_domain(a: &ConstraintSet, b: &ConstraintSet, radius: i64) -> bool {
    let mut vars: Vec<SymVar> = a.vars_in_atoms().into_iter().collect();
    for v in b.vars_in_atoms() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let mut assignment: BTreeMap<SymVar, i64> = BTreeMap::new();
    fn walk(
        vars: &[SymVar],
        depth: usize,
        radius: i64,
        assignment: &mut BTreeMap<SymVar, i64>,
        a: &ConstraintSet,
        b: &ConstraintSet,
    ) -> bool {
        if depth == vars.len() {
            return a.evaluate(assignment) == b.evaluate(assignment);
        }
        let lo = match vars[depth] {
            SymVar::Len { .. } => 0,
            SymVar::Var(_) => -radius,
        };
        for value in lo..=radius {
            assignment.insert(vars[depth].clone(), value);
            if !walk(vars, depth + 1, radius, assignment, a, b) {
                return false;
            }
        }
        true
    }
    walk(&vars, 0, radius, &mut assignment, a, b)
}

/// Criterion 5: fast-path/enumeration agreement and renaming invariance.
#[test]
fn acceptance_5_constraint_oracle() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let radius = 64i64;

    let mut fast_path_fired = 0usize;
    let mut checked = 0usize;
    for i in 0..1000usize {
        // var-count mix keeps the 3-variable enumeration share sane
        let var_count = match i % 10 {
            0 => 3,
            1..=5 => 2,
            _ => 1,
        };
        let a = simplify(&random_set(&mut rng, var_count));
        let (b, matching) = if i % 2 == 0 {
            renamed_copy(&a, i)
        } else {
            let other = simplify(&random_set(&mut rng, var_count));
            match match_variables(&a, &other) {
                Ok(m) => (other, m),
                Err(_) => continue,
            }
        };
        checked += 1;
        let renamed_back = b.rename(&matching.b_to_a());
        let fires = a.paths == renamed_back.paths;
        if fires {
            fast_path_fired += 1;
            // when the fast path fires its verdict must match enumeration
            if check_equivalence(&a, &b, &matching, radius).unwrap() != Verdict::Equivalent {
                failures.push(format!("fast path fired but did not report Equivalent (pair {i})"));
            }
            if !sets_agree_on_domain(&a, &renamed_back, radius) {
                failures.push(format!(
                    "fast-path verdict contradicts enumeration on pair {i}"
                ));
            }
        } else {
            // full check must agree with the independent oracle
            match check_equivalence(&a, &b, &matching, radius) {
                Ok(v) => {
                    let oracle = sets_agree_on_domain(&a, &renamed_back, radius);
                    let agreed = (v == Verdict::Equivalent) == oracle;
                    if !agreed {
                        failures.push(format!("verdict {v:?} disagrees with oracle on pair {i}"));
                    }
                }
                Err(EquivError::DomainTooLarge { .. }) => {}
            }
        }
    }
    if checked < 900 {
        failures.push(format!("only {checked} pairs checked"));
    }
    if fast_path_fired < 400 {
        failures.push(format!("fast path fired only {fast_path_fired} times"));
    }

    // renaming invariance on 200 random role-respecting renamings
    for i in 0..200usize {
        let var_count = 1 + i % 3;
        let cs = simplify(&random_set(&mut rng, var_count));
        let (renamed, matching) = renamed_copy(&cs, i);
        match check_equivalence(&cs, &renamed, &matching, radius) {
            Ok(Verdict::Equivalent) => {}
            other => {
                failures.push(format!("renaming invariance violated ({other:?}) at {i}"));
            }
        }
    }

    report_line(5, "constraint oracle", started, Duration::from_secs(60), &failures);
}

// ---- criterion 6 machinery ----

/// Independent single-linkage clustering: all pairs, BFS components.
fn brute_force_clusters(vectors: &[WeightedVector], s: f64, min_tokens: usize) -> Vec<Vec<usize>> {
    let eligible: Vec<usize> = (0..vectors.len())
        .filter(|&i| vectors[i].base.slice_ref.token_count >= min_tokens)
        .collect();
    let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, &a) in eligible.iter().enumerate() {
        for &b in &eligible[pos + 1..] {
            let d = euclidean_distance(&vectors[a].weighted, &vectors[b].weighted).unwrap();
            let t = cluster_threshold(s, &vectors[a].base, &vectors[b].base);
            if d <= t {
                adjacency.entry(a).or_default().push(b);
                adjacency.entry(b).or_default().push(a);
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut clusters = Vec::new();
    for &start in &eligible {
        if seen.contains(&start) || !adjacency.contains_key(&start) {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = vec![start];
        seen.insert(start);
        while let Some(node) = queue.pop() {
            component.push(node);
            for &next in adjacency.get(&node).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push(next);
                }
            }
        }
        component.sort_unstable();
        if component.len() >= 2 {
            clusters.push(component);
        }
    }
    clusters.sort();
    clusters
}

/// Criterion 6: clustering equals brute force; E >= sqrt(H) holds.
#[test]
fn acceptance_6_clustering_exactness() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    for corpus_id in 0..50usize {
        let n = rng.random_range(10..=200usize);
        let s = [0.70, 0.75, 0.80, 0.90, 0.95, 1.00][corpus_id % 6];
        let vectors: Vec<WeightedVector> = (0..n)
            .map(|i| {
                let mut counts = [0u32; NUM_KINDS];
                for c in counts.iter_mut() {
                    *c = rng.random_range(0..12);
                }
                WeightedVector::new(FeatureVector {
                    size: counts.iter().sum(),
                    counts,
                    slice_ref: clone_lattice::vectors::SliceRef {
                        id: format!("corpus{corpus_id}/v{i}"),
                        token_count: rng.random_range(10..40),
                    },
                })
            })
            .collect();
        let expected = brute_force_clusters(&vectors, s, 20);
        let got: Vec<Vec<usize>> = lsh_cluster(&vectors, s, 20, corpus_id as u64)
            .into_iter()
            .map(|c| c.members)
            .collect();
        if got != expected {
            failures.push(format!(
                "corpus {corpus_id} (n={n}, s={s}): LSH clustering differs from brute force"
            ));
        }
    }

    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let len = rng.random_range(1..32usize);
        let a: Vec<f64> = (0..len).map(|_| f64::from(rng.random_range(0..60u32))).collect();
        let b: Vec<f64> = (0..len).map(|_| f64::from(rng.random_range(0..60u32))).collect();
        let e = euclidean_distance(&a, &b).unwrap();
        let h = hamming_distance(&a, &b).unwrap();
        worst = worst.max(h.sqrt() - e);
        if e + 1e-9 < h.sqrt() {
            failures.push(format!("E >= sqrt(H) violated: E={e}, H={h}"));
            break;
        }
    }

    report_line(6, "clustering exactness", started, Duration::from_secs(60), &failures);
}

/// Criterion 7: identical config and seed give byte-identical reports.
#[test]
fn acceptance_7_determinism() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let dir = tempfile::tempdir().unwrap();
    let mut bytes: Vec<String> = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("report{run}.json"));
        let cfg = PipelineConfig {
            corpus_dir: fixtures("micro"),
            report_path: Some(path.clone()),
            ..PipelineConfig::default()
        };
        let report = run_pipeline(&cfg).unwrap();
        clone_lattice::pipeline::emit_report(&report, &path).unwrap();
        bytes.push(std::fs::read_to_string(&path).unwrap());
    }
    if bytes[0] != bytes[1] {
        failures.push("reports differ between runs".into());
    }
    if bytes[0].is_empty() {
        failures.push("report is empty".into());
    }

    report_line(7, "determinism", started, Duration::from_secs(60), &failures);
}

/// Sanity net for the frozen related-variable expectations: tainting is
/// stable across reparsing the printed fixtures.
#[test]
fn related_sets_stable_under_reprint() {
    let corpus = load_corpus(&fixtures("micro")).unwrap();
    for cf in corpus.functions.iter().take(4) {
        let printed = clone_lattice::printer::print_tree(&cf.tree);
        let reparsed = parse_translation_unit(&printed, "rt.c").unwrap();
        let graph_a = build_dependency_graph(&cf.tree);
        let graph_b = build_dependency_graph(&reparsed[0]);
        for p in enumerate_pointers(&cf.tree) {
            let ra = taint_pointer(&graph_a, &p).unwrap();
            let pb = enumerate_pointers(&reparsed[0])
                .into_iter()
                .find(|q| q.name == p.name)
                .unwrap();
            let rb = taint_pointer(&graph_b, &pb).unwrap();
            assert_eq!(ra.variables, rb.variables, "{}", p.name);
            let _ = isolate(&cf.tree, &p, &ra);
        }
    }
}
