//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.
//!
//! `HNCG_ONLY=3,4` restricts the run to the listed criteria.
//! `HNCG_EXTENDED=1` enables the multi-hour criterion 10.

use std::collections::{BTreeSet, VecDeque};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hncg::constructions::{
    build, dei_algorithm1, validity_interval, Algo1Policy, ConstructionId,
};
use hncg::cost::{CostModel, CostParams, Model, Rational};
use hncg::dynamics::{self, DynamicsConfig, DynamicsState};
use hncg::experiment::{rows_to_csv, run_batch, BatchConfig, BatchResult};
use hncg::graph::{DistanceMatrix, Edge, Graph, GraphFile, Population};
use hncg::init::{Coloring, InitSpec, Topology};
use hncg::metrics::{
    bichromatic_degree, bichromatic_matching_covering, blue_type, curious_types,
    global_segregation, icf_intermediate_necessary, is_fully_intra_connected, local_segregation,
};
use hncg::stability::{enumerate_stable_graphs, is_pairwise_stable, Mode, Move};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn q(x: Rational) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn pop(counts: &[usize]) -> Population {
    Population::from_counts(counts).unwrap()
}

fn within(limit: Duration, elapsed: Duration, mut out: Outcome) -> Outcome {
    out.detail = format!("{} [{:.1?}, limit {:?}]", out.detail, elapsed, limit);
    if elapsed > limit {
        out.pass = false;
        out.detail.push_str(" time limit exceeded");
    }
    out
}

// ---------------------------------------------------------------------------
// Independent cost oracle: plain BFS and the cost definitions.

fn oracle_bfs(g: &Graph, s: usize) -> Vec<Option<u64>> {
    let mut dist = vec![None; g.n()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(dist[x].unwrap() + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// (number of unreachable agents, neighborhood cost + finite distances)
fn oracle_cost(model: Model, alpha: Rational, p: &Population, g: &Graph, u: usize) -> (i64, BigRational) {
    let deg = g.degree(u) as i64;
    let f = g.neighbors(u).iter().filter(|&&v| p.type_of(v) == p.type_of(u)).count() as i64;
    let e = deg - f;
    let a = q(alpha);
    let int = |x: i64| BigRational::from_integer(BigInt::from(x));
    let neighborhood = match model {
        Model::Icf => int(deg) * a * (int(1) + BigRational::new(1.into(), (f + 1).into())),
        Model::Dei => {
            let mut h = BigRational::zero();
            for i in 1..=e {
                h += BigRational::new(1.into(), i.into());
            }
            a * (int(deg) + h)
        }
    };
    let dist = oracle_bfs(g, u);
    let unreachable = dist.iter().filter(|d| d.is_none()).count() as i64;
    let finite: u64 = dist.iter().flatten().sum();
    (unreachable, neighborhood + int(finite as i64))
}

fn random_graph(rng: &mut Xoshiro256PlusPlus, n: usize, p: f64) -> Graph {
    Graph::from_predicate(n, |_, _| rng.gen_bool(p))
}

fn random_population(rng: &mut Xoshiro256PlusPlus, n: usize, k: usize) -> Population {
    loop {
        let types: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        if let Ok(p) = Population::new(types) {
            return p;
        }
    }
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let mut checked = 0;
    let mut mismatches = Vec::new();
    while checked < 1000 {
        let n = rng.gen_range(2..=60);
        let k = rng.gen_range(1..=3.min(n));
        let density = rng.gen_range(0.02..0.5);
        let g = random_graph(&mut rng, n, density);
        let p = random_population(&mut rng, n, k);
        let model = if rng.gen_bool(0.5) { Model::Icf } else { Model::Dei };
        let alpha = r(rng.gen_range(1..=400), rng.gen_range(1..=100));
        let u = rng.gen_range(0..n);
        let v = (u + rng.gen_range(1..n)) % n;
        let mv = if g.has_edge(u, v) {
            Move::DeleteEdge(Edge::new(u, v))
        } else {
            Move::AddEdge(Edge::new(u, v))
        };
        let params = CostParams::new(model, alpha).unwrap();
        let cm = CostModel::<BigRational>::new(params, n);
        let dm = DistanceMatrix::compute(&g);
        let delta = cm.delta_total_for_move(&p, &g, &dm, u, mv).unwrap();
        let mut h = g.clone();
        h.toggle_edge(u, v).unwrap();
        let (ub, vb) = oracle_cost(model, alpha, &p, &g, u);
        let (ua, va) = oracle_cost(model, alpha, &p, &h, u);
        if delta.unreachable != ua - ub || delta.value != va - vb {
            mismatches.push(format!("n={n} {mv} {model} alpha={alpha}"));
        }
        checked += 1;
    }
    let out = if mismatches.is_empty() {
        pass(format!("{checked} random trials agree exactly"))
    } else {
        fail(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))
    };
    within(Duration::from_secs(2), start.elapsed(), out)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let populations: Vec<Vec<usize>> = vec![
        vec![2, 3],
        vec![3, 5],
        vec![4, 6],
        vec![1, 2, 3],
        vec![2, 2, 2],
        vec![3, 4, 6],
        // needed for entries whose structural requirements the list above
        // does not meet (at least six blue agents; single-agent types)
        vec![6, 6],
        vec![1, 1, 1],
        vec![1, 3],
    ];
    let mut checks = 0;
    let mut failures: Vec<String> = Vec::new();
    let mut tested_ids = BTreeSet::new();
    let mut check = |id: ConstructionId, p: &Population, model: Model, alpha: Rational| {
        let built = build(id, p, Some(alpha)).unwrap();
        let params = CostParams::new(model, alpha).unwrap();
        checks += 1;
        tested_ids.insert(id.name());
        let report = is_pairwise_stable(&params, p, &built.graph);
        if !report.is_stable() {
            failures.push(format!(
                "{id} {:?} {model} alpha={alpha}: {}",
                p.counts(),
                report.witness().unwrap()
            ));
        }
    };

    for counts in &populations {
        let p = pop(counts);
        for id in ConstructionId::CATALOGUE {
            for &model in id.models() {
                let Ok(iv) = validity_interval(id, &p, model) else {
                    continue;
                };
                for alpha in iv.samples(3) {
                    check(id, &p, model, alpha);
                }
            }
        }
    }
    // named instances
    check(ConstructionId::DoubleStar, &pop(&[4, 6]), Model::Icf, r(3, 2));
    check(ConstructionId::DoubleStarSwitched, &pop(&[3, 3]), Model::Dei, r(3, 2));
    for alpha in [r(4, 5), r(19, 20)] {
        check(ConstructionId::IcfIntermediate2, &pop(&[3, 5]), Model::Icf, alpha);
    }
    for counts in [[2, 3, 5], [3, 4, 6]] {
        for alpha in [r(3, 4), r(4, 5), r(7, 8), r(12, 13), r(19, 20)] {
            check(ConstructionId::IcfIntermediateK, &pop(&counts), Model::Icf, alpha);
        }
    }
    for counts in [&[1, 1, 1][..], &[1, 3], &[1, 2, 3]] {
        let p = pop(counts);
        let iv = validity_interval(ConstructionId::DeiCentralHubK, &p, Model::Dei).unwrap();
        for alpha in iv.samples(3) {
            check(ConstructionId::DeiCentralHubK, &p, Model::Dei, alpha);
        }
    }
    for counts in [&[2, 3][..], &[1, 2, 3], &[2, 2, 2], &[2, 2, 3, 4]] {
        let p = pop(counts);
        let k = p.k() as i64;
        let lo = r(k, k + 1);
        for alpha in [lo, (lo + Rational::one()) / Rational::from_integer(2), Rational::one()] {
            check(ConstructionId::DeiAlgo1(Algo1Policy::Lexicographic), &p, Model::Dei, alpha);
        }
    }
    let missing: Vec<_> = ConstructionId::CATALOGUE
        .iter()
        .map(|id| id.name())
        .filter(|name| !tested_ids.contains(name))
        .collect();
    let out = if failures.is_empty() && missing.is_empty() {
        pass(format!("{checks} (entry, population, alpha) checks stable"))
    } else {
        let mut by_entry = BTreeSet::new();
        for f in &failures {
            by_entry.insert(f.split_whitespace().next().unwrap().to_string());
        }
        fail(format!(
            "{} of {checks} checks unstable (entries: {}), untested: {:?}; first: {}",
            failures.len(),
            by_entry.into_iter().collect::<Vec<_>>().join(", "),
            missing,
            failures.join(" / ")
        ))
    };
    within(Duration::from_secs(30), start.elapsed(), out)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = pop(&[2, 3]);
    let icf = enumerate_stable_graphs(&CostParams::icf(r(1, 2)), &p, None).unwrap();
    let dei = enumerate_stable_graphs(&CostParams::dei(r(2, 5)), &p, None).unwrap();
    let k5 = Graph::complete(5);
    let out = if icf == vec![k5.clone()] && dei == vec![k5] {
        pass("ICF alpha=1/2 and DEI alpha=2/5 each yield exactly K_5")
    } else {
        fail(format!("ICF found {}, DEI found {}", icf.len(), dei.len()))
    };
    within(Duration::from_secs(5), start.elapsed(), out)
}

fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        Graph::new(
            n,
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e),
        )
        .unwrap()
    })
}

fn criterion_4() -> Outcome {
    let p = pop(&[2, 3]);
    let stable = enumerate_stable_graphs(&CostParams::dei(r(17, 20)), &p, None).unwrap();
    let blue = blue_type(&p);
    let characterized: Vec<Graph> = all_graphs(5)
        .filter(|g| is_fully_intra_connected(g, &p) && bichromatic_matching_covering(g, &p, blue))
        .collect();
    let bound = r(3, 5);
    let seg_ok = stable.iter().all(|g| {
        global_segregation(g, &p).unwrap() >= bound
            && local_segregation(g, &p).unwrap() >= q(bound)
    });
    if stable.len() == 6 && stable == characterized && seg_ok {
        pass("6 stable graphs, equal to the fully intra-connected blue-covering matchings; gs, ls >= 3/5")
    } else {
        fail(format!(
            "{} stable, {} characterized, same set: {}, segregation bounds: {seg_ok}",
            stable.len(),
            characterized.len(),
            stable == characterized
        ))
    }
}

fn criterion_5() -> Outcome {
    let p = pop(&[2, 3]);
    let stable = enumerate_stable_graphs(&CostParams::icf(r(17, 20)), &p, None).unwrap();
    let necessary = stable.iter().all(|g| icf_intermediate_necessary(g, &p));
    let gs: Vec<Rational> = stable.iter().map(|g| global_segregation(g, &p).unwrap()).collect();
    let weak = gs.iter().all(|&x| x >= r(3, 5));
    let strong = gs.iter().all(|&x| x >= r(4, 5));
    let listing = gs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let detail = format!(
        "{} stable graphs, necessary conditions: {necessary}, gs = [{listing}], gs >= 1-2/n: {weak}; \
         reported only: gs >= 1-1/n holds: {strong}",
        stable.len()
    );
    if !stable.is_empty() && necessary && weak {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut graphs = 0;
    let icf_alphas = [r(1, 2), r(4, 5), r(17, 20), r(6, 7), r(1, 1), r(5, 4), r(3, 2)];
    let dei_alphas = [r(1, 2), r(3, 4), r(4, 5), r(17, 20), r(9, 10), r(1, 1)];
    for counts in [[2, 3], [3, 3]] {
        let p = pop(&counts);
        let nr = p.red_count() as i64;
        for (model, alphas) in [(Model::Icf, &icf_alphas[..]), (Model::Dei, &dei_alphas[..])] {
            for &alpha in alphas {
                let params = CostParams::new(model, alpha).unwrap();
                let stable = enumerate_stable_graphs(&params, &p, None).unwrap();
                graphs += stable.len();
                if stable.is_empty() {
                    problems.push(format!("{model} {counts:?} alpha={alpha}: no stable graph"));
                }
                for g in &stable {
                    let tag = format!("{model} {counts:?} alpha={alpha} edges={:?}", g.edges());
                    let full = is_fully_intra_connected(g, &p);
                    let intra_bound = match model {
                        Model::Icf => r(6, 7),
                        Model::Dei => r(1, 1),
                    };
                    if alpha < intra_bound && !full {
                        problems.push(format!("{tag}: not fully intra-connected"));
                    }
                    let diam_bound = match model {
                        Model::Icf => r(4, 3),
                        Model::Dei => r(1, 1),
                    };
                    if alpha < diam_bound {
                        if g.n() > 1 && DistanceMatrix::compute(g).diameter().is_none_or(|d| d > 2) {
                            problems.push(format!("{tag}: diameter above 2"));
                        }
                        if curious_types(g, &p).is_empty() {
                            problems.push(format!("{tag}: no curious type"));
                        }
                    }
                    if model == Model::Dei
                        && full
                        && alpha > r(nr, nr + 1)
                        && (0..g.n()).any(|u| bichromatic_degree(g, &p, u) > 1)
                    {
                        problems.push(format!("{tag}: agent with two bichromatic edges"));
                    }
                }
            }
        }
    }
    let out = if problems.is_empty() {
        pass(format!("{graphs} stable graphs satisfy the structural properties"))
    } else {
        fail(format!("{} violations: {}", problems.len(), problems.join(" / ")))
    };
    within(Duration::from_secs(60), start.elapsed(), out)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    let mut problems = Vec::new();
    for trial in 0..200 {
        let k = rng.gen_range(1..=4usize);
        let n = rng.gen_range(k..=50usize);
        // random composition of n into k positive parts
        let mut cuts: Vec<usize> = (1..n).collect();
        let mut chosen = Vec::new();
        for _ in 0..k - 1 {
            let i = rng.gen_range(0..cuts.len());
            chosen.push(cuts.swap_remove(i));
        }
        chosen.sort_unstable();
        let mut counts = Vec::new();
        let mut prev = 0;
        for c in chosen.into_iter().chain([n]) {
            counts.push(c - prev);
            prev = c;
        }
        let p = pop(&counts);
        let g = dei_algorithm1(&p, Algo1Policy::SeededRandom(rng.gen()));
        let tag = format!("trial {trial} counts {counts:?}");
        if g.n() > 1 && DistanceMatrix::compute(&g).diameter().is_none_or(|d| d > 2) {
            problems.push(format!("{tag}: diameter"));
        }
        for e in g.edges() {
            let (u, v) = (e.lo(), e.hi());
            if !p.same_type(u, v) && g.neighbors(u).iter().any(|&w| g.has_edge(w, v)) {
                problems.push(format!("{tag}: triangle on bichromatic edge {u}-{v}"));
                break;
            }
        }
        if (0..g.n()).any(|u| bichromatic_degree(&g, &p, u) > k - 1) {
            problems.push(format!("{tag}: bichromatic degree"));
        }
        let alpha = r(k as i64, k as i64 + 1);
        if !is_pairwise_stable(&CostParams::dei(alpha), &p, &g).is_stable() {
            problems.push(format!("{tag}: unstable at alpha={alpha}"));
        }
    }
    let out = if problems.is_empty() {
        pass("200 random builds satisfy all properties and are stable at k/(k+1)")
    } else {
        fail(format!("{} violations, first: {}", problems.len(), problems[0]))
    };
    within(Duration::from_secs(30), start.elapsed(), out)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let state = DynamicsState::new(
        CostParams::icf(r(1, 2)),
        Mode::Full,
        Rational::one(),
        pop(&[4]),
        path,
        1,
    )
    .unwrap();
    let rec = state.run(10_000, 1, true, 1);
    let p4_ok = rec.converged && rec.final_graph == Graph::complete(4);

    let mut in_band = 0;
    let mut converged = 0;
    let mut values = Vec::new();
    for seed in 0..20 {
        let config = DynamicsConfig::new(
            CostParams::dei(Rational::from_integer(15)),
            Mode::Full,
            r(101, 100),
            InitSpec {
                topology: Topology::RandomTree,
                coloring: Coloring::Integrated,
                counts: vec![25, 25],
                seed,
            },
            seed,
        );
        let rec = dynamics::run(&config).unwrap();
        converged += usize::from(rec.converged);
        if (0.75..=1.0).contains(&rec.summary.ls) {
            in_band += 1;
        }
        values.push(format!("{:.3}", rec.summary.ls));
    }
    let detail = format!(
        "P_4 -> K_4: {p4_ok}; n=50 alpha=15: {in_band}/20 final ls in [0.75, 1], {converged}/20 converged; ls = [{}]",
        values.join(" ")
    );
    let out = if p4_ok && in_band >= 18 {
        pass(detail)
    } else {
        fail(detail)
    };
    within(Duration::from_secs(120), start.elapsed(), out)
}

fn median_ls(result: &BatchResult, model: Model, alpha: i64, topology: Topology, coloring: Coloring, mode: Mode) -> f64 {
    let cell = result
        .find(model, Rational::from_integer(alpha), topology, coloring, mode)
        .expect("cell exists");
    let values: Vec<f64> = cell.runs.iter().map(|r| r.summary.ls).collect();
    hncg::experiment::box_stats(&values).unwrap().median
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let tree = Topology::RandomTree;
    let grid = Topology::Grid { rows: 10, cols: 20 };
    let base = |modes: &str, alphas: &str, colorings: &str| {
        BatchConfig::from_json(&format!(
            r#"{{"models":["dei"],"alphas":{alphas},"topologies":["tree","grid:10x20"],
                "colorings":{colorings},"modes":{modes},"runs_per_cell":10,
                "counts":[100,100],"epsilon":"1.01","base_seed":2024,"verify_exact":false,
                "max_steps":20000}}"#
        ))
        .unwrap()
    };
    let best = run_batch(
        &base(r#"["best_move"]"#, "[5,15,30]", r#"["integrated","segregated"]"#),
        true,
    )
    .unwrap();
    let add_only = run_batch(&base(r#"["add_only"]"#, "[30]", r#"["integrated"]"#), true).unwrap();

    let mut notes = Vec::new();
    let mut ok = true;
    for topology in [tree, grid] {
        for coloring in [Coloring::Integrated, Coloring::Segregated] {
            let m: Vec<f64> = [5, 15, 30]
                .iter()
                .map(|&a| median_ls(&best, Model::Dei, a, topology, coloring, Mode::Full))
                .collect();
            let inversions: Vec<f64> = m.windows(2).map(|w| w[0] - w[1]).filter(|&d| d > 0.0).collect();
            let trend = inversions.is_empty() || (inversions.len() == 1 && inversions[0] <= 0.02);
            ok &= trend;
            notes.push(format!(
                "(a) {topology}/{coloring} medians {:.3} {:.3} {:.3} {}",
                m[0],
                m[1],
                m[2],
                if trend { "ok" } else { "NOT monotone" }
            ));
        }
    }
    let seg = median_ls(&best, Model::Dei, 15, tree, Coloring::Segregated, Mode::Full);
    let int = median_ls(&best, Model::Dei, 15, tree, Coloring::Integrated, Mode::Full);
    let b_ok = seg - int >= 0.03;
    ok &= b_ok;
    notes.push(format!("(b) tree alpha=15 segregated {seg:.3} vs integrated {int:.3} {}", if b_ok { "ok" } else { "FAIL" }));
    for topology in [tree, grid] {
        let add = median_ls(&add_only, Model::Dei, 30, topology, Coloring::Integrated, Mode::AddOnly);
        let seg = median_ls(&best, Model::Dei, 30, topology, Coloring::Segregated, Mode::Full);
        let c_ok = add <= seg;
        ok &= c_ok;
        notes.push(format!(
            "(c) {topology} alpha=30 add-only integrated {add:.3} vs best-move segregated {seg:.3} {}",
            if c_ok { "ok" } else { "FAIL" }
        ));
    }
    let nonconv = best.nonconverged_fraction().max(add_only.nonconverged_fraction());
    notes.push(format!("non-converged fraction {nonconv:.2}"));
    let detail = notes.join("; ");
    within(
        Duration::from_secs(30 * 60),
        start.elapsed(),
        if ok { pass(detail) } else { fail(detail) },
    )
}

fn criterion_10() -> Option<Outcome> {
    if std::env::var("HNCG_EXTENDED").map_or(true, |v| v != "1") {
        return None;
    }
    let config = BatchConfig::from_json(
        r#"{"models":["dei"],"alphas":[5],"topologies":["tree"],"colorings":["segregated"],
            "modes":["best_move"],"runs_per_cell":50,"counts":[500,500],"epsilon":"1.01",
            "base_seed":10,"verify_exact":false}"#,
    )
    .unwrap();
    let result = run_batch(&config, true).unwrap();
    let m = median_ls(&result, Model::Dei, 5, Topology::RandomTree, Coloring::Segregated, Mode::Full);
    let detail = format!("median final ls {m:.4} (target [0.68, 0.74])");
    Some(if (0.68..=0.74).contains(&m) { pass(detail) } else { fail(detail) })
}

fn criterion_11() -> Outcome {
    let config = BatchConfig::from_json(
        r#"{"models":["icf","dei"],"alphas":["1.5",4],"topologies":["tree","grid:4x3"],
            "colorings":["integrated","segregated"],"modes":["best_move","add_only"],
            "runs_per_cell":3,"counts":[6,6],"epsilon":"1.01","base_seed":11}"#,
    )
    .unwrap();
    let a = run_batch(&config, false).unwrap();
    let b = run_batch(&config, false).unwrap();
    let c = run_batch(&config, true).unwrap();
    let csv = |r: &BatchResult| {
        (
            rows_to_csv(&r.summary_rows()).unwrap(),
            rows_to_csv(&r.stats_rows()).unwrap(),
        )
    };
    let deterministic = csv(&a) == csv(&b) && csv(&a) == csv(&c);

    let text = r#"{"n":5,"types":[1,0,1,0,0],"edges":[[4,3],[0,2],[2,1],[3,0]]}"#;
    let (p, g) = GraphFile::from_json(text).unwrap().into_parts().unwrap();
    let once = GraphFile::from_graph(&p, &g).to_json();
    let (p2, g2) = GraphFile::from_json(&once).unwrap().into_parts().unwrap();
    let twice = GraphFile::from_graph(&p2, &g2).to_json();
    let canonical = once == twice
        && once == "{\"n\":5,\"types\":[1,0,1,0,0],\"edges\":[[0,2],[0,3],[1,2],[3,4]]}\n";
    let detail = format!("batch CSVs identical across repeats and parallelism: {deterministic}; graph files canonical: {canonical}");
    if deterministic && canonical {
        pass(detail)
    } else {
        fail(detail)
    }
}

type Criterion = fn() -> Option<Outcome>;

fn main() -> ExitCode {
    let only: Option<BTreeSet<u32>> = std::env::var("HNCG_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |i: u32| only.as_ref().is_none_or(|set| set.contains(&i));
    let criteria: Vec<(u32, &str, Criterion)> = vec![
        (1, "delta oracle equivalence", || Some(criterion_1())),
        (2, "construction round-trip", || Some(criterion_2())),
        (3, "exhaustive uniqueness", || Some(criterion_3())),
        (4, "DEI characterization", || Some(criterion_4())),
        (5, "ICF intermediate necessity", || Some(criterion_5())),
        (6, "structural properties", || Some(criterion_6())),
        (7, "Algorithm 1 properties", || Some(criterion_7())),
        (8, "dynamics convergence", || Some(criterion_8())),
        (9, "experiment trends", || Some(criterion_9())),
        (10, "extended reproduction (opt-in)", criterion_10),
        (11, "determinism and formats", || Some(criterion_11())),
    ];
    let mut failed = 0;
    for (i, name, run) in criteria {
        if !wanted(i) {
            continue;
        }
        match run() {
            Some(o) => {
                println!(
                    "criterion {i:>2} {} {name}: {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.detail
                );
                failed += usize::from(!o.pass);
            }
            None => println!("criterion {i:>2} SKIP {name}: set HNCG_EXTENDED=1 to run"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
