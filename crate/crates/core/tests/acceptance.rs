//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gibbsd::coexistence::{
    classic_rule_equivalence, classify_facets, empirical_dof, generalized_phase_rule, lever_rule,
    phases_for_dof, region_label, CoexistenceReport, SimplexKind, DEFAULT_RANK_TOLERANCE,
    DEFAULT_SPACING_THRESHOLD,
};
use gibbsd::combinatorics::{
    cyclic_fvector, dehn_somerville_check, fvector_of_complex, moment_curve, simplex_fvector,
    ternary_bounds, ubt_check, FVector, TernaryClass,
};
use gibbsd::diagrams::{build_diagram, legendre_transform, DiagramSpec};
use gibbsd::hull::{convex_hull, lower_convex_hull, naive_hull_oracle, AxisDescriptor, LowerHull, PointCloud};
use gibbsd::io::parse_compound_dataset;
use gibbsd::models::{
    builtin_demo_grid, builtin_demo_model, is_locally_stable, sample_surface, spinodal_locus,
};
use gibbsd::synthetic::{random_cloud, random_grid_cloud, random_ternary_dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, budget: Duration, detail: String, ok: bool) -> Outcome {
    let detail = format!("{detail}; {:.3} ms (budget {} ms)", elapsed.as_secs_f64() * 1e3, budget.as_millis());
    check(ok && elapsed <= budget, detail)
}

fn phase_rule_table() -> Outcome {
    let t = Instant::now();
    let rows = [
        generalized_phase_rule(2, 3),
        generalized_phase_rule(2, 2),
        generalized_phase_rule(2, 1),
        phases_for_dof(3, 2),
    ];
    let elapsed = t.elapsed();
    let got: Vec<usize> = rows.into_iter().map(|r| r.map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    within(elapsed, Duration::from_millis(1), format!("F(2,3), F(2,2), F(2,1), P(W=3,F=2) = {got:?}"), got == [0, 1, 2, 2])
}

fn classic_equivalence() -> Outcome {
    let mut cases = 0;
    for c in 1..=5usize {
        let m = classic_rule_equivalence(c).map_err(|e| e.to_string())?;
        for p in 1..=c + 2 {
            let classic = c + 2 - p;
            let generalized = generalized_phase_rule(c + 1, p).map_err(|e| e.to_string())?;
            if m.work != c + 1 || generalized != classic || m.classic_dof(p) != Some(classic) {
                return Err(format!("C = {c}, P = {p}: {generalized} != {classic}"));
            }
            cases += 1;
        }
    }
    check(true, format!("{cases} (C, P) cases agree"))
}

fn simplex_table() -> Outcome {
    const TABLE: [&[u64]; 7] = [
        &[1],
        &[2, 1],
        &[3, 3, 1],
        &[4, 6, 4, 1],
        &[5, 10, 10, 5, 1],
        &[6, 15, 20, 15, 6, 1],
        &[7, 21, 35, 35, 21, 7, 1],
    ];
    for (k, row) in TABLE.iter().enumerate() {
        let f = simplex_fvector(k).map_err(|e| e.to_string())?;
        if f.counts != *row {
            return Err(format!("{k}-simplex: {f} != {row:?}"));
        }
    }
    check(true, "28 entries for k = 0..=6 match".into())
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn dehn_somerville() -> Outcome {
    let tet = FVector::new(vec![4, 6, 4]);
    let euler = tet.counts[0] as i64 - tet.counts[1] as i64 + tet.counts[2] as i64;
    if euler != 2 || !dehn_somerville_check(&tet).all_pass() {
        return Err(format!("tetrahedron: f0 - f1 + f2 = {euler}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = Instant::now();
    let mut failures = 0;
    for trial in 0..200 {
        let d = 3 + trial % 3;
        let n = rng.gen_range(d + 1..=10);
        let facets = convex_hull(&random_points(&mut rng, n, d), 1e-9).map_err(|e| e.to_string())?;
        if !dehn_somerville_check(&fvector_of_complex(&facets, d)).all_pass() {
            failures += 1;
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(10),
        format!("tetrahedron f0 - f1 + f2 = 2; {failures} of 200 random 3D-5D hulls fail"),
        failures == 0,
    )
}

fn upper_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = Instant::now();
    let mut exceed = 0;
    let mut hulls = 0;
    for trial in 0..300 {
        let d = 2 + trial % 5;
        let n = rng.gen_range(d + 1..=10);
        let f = fvector_of_complex(&convex_hull(&random_points(&mut rng, n, d), 1e-9).map_err(|e| e.to_string())?, d);
        let vertices = f.counts[0] as usize;
        if vertices > d {
            hulls += 1;
            if !ubt_check(&f, vertices).map_err(|e| e.to_string())?.all_pass() {
                exceed += 1;
            }
        }
    }
    let mut attained = 0;
    let mut cyclic = 0;
    for d in 2..=6 {
        for n in d + 1..=10 {
            let f = fvector_of_complex(&convex_hull(&moment_curve(n, d), 1e-9).map_err(|e| e.to_string())?, d);
            cyclic += 1;
            if f == cyclic_fvector(n, d).map_err(|e| e.to_string())? {
                attained += 1;
            }
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(30),
        format!("{exceed} of {hulls} random hulls exceed c(n, d); {attained} of {cyclic} moment-curve hulls attain it"),
        exceed == 0 && attained == cyclic,
    )
}

fn ternary() -> Outcome {
    let elements = r#"[
        {"id": "A", "composition": {"A": 1}, "energy": 0},
        {"id": "B", "composition": {"B": 1}, "energy": 0},
        {"id": "C", "composition": {"C": 1}, "energy": 0}
    ]"#;
    let s = parse_compound_dataset(elements).map_err(|e| e.to_string())?.remove(0);
    let hull = lower_convex_hull(&s.cloud, 1e-9).map_err(|e| e.to_string())?;
    let empty = (hull.hull_vertices.len(), hull.facets.len());
    let endpoints = (
        ternary_bounds(21, 19).map_err(|e| e.to_string())?,
        ternary_bounds(21, 38).map_err(|e| e.to_string())?,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut outside = 0;
    for i in 0..100 {
        let entries = random_ternary_dataset(&mut rng, 5 + i % 20);
        let text = serde_json::to_string(&entries).map_err(|e| e.to_string())?;
        let system = parse_compound_dataset(&text).map_err(|e| e.to_string())?.remove(0);
        let hull = lower_convex_hull(&system.cloud, 1e-9).map_err(|e| e.to_string())?;
        let (f0, f2) = (hull.hull_vertices.len() as u64, hull.facets.len() as u64);
        if !(f0 - 2 <= f2 && f2 <= 2 * f0 - 4) {
            outside += 1;
        }
    }
    check(
        empty == (3, 1)
            && endpoints == (TernaryClass::Minimal, TernaryClass::Maximal)
            && outside == 0,
        format!(
            "elements only: f0 = {}, f2 = {}; f0 = 21: 19 -> {}, 38 -> {}; {outside} of 100 synthetic datasets outside [f0 - 2, 2 f0 - 4]",
            empty.0, empty.1, endpoints.0, endpoints.1
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = Instant::now();
    let mut mismatches = Vec::new();
    let trials = 120;
    for trial in 0..trials {
        let w = 1 + trial % 3;
        let n = rng.gen_range(w + 2..=25);
        let cloud = if trial % 2 == 0 {
            random_cloud(&mut rng, n, w, 3)
        } else {
            random_grid_cloud(&mut rng, n, w, 3)
        }
        .map_err(|e| e.to_string())?;
        let a = lower_convex_hull(&cloud, 1e-9).map(|h| h.vertex_sets());
        let b = naive_hull_oracle(&cloud, 1e-9).map(|h| h.vertex_sets());
        let same = match (&a, &b) {
            (Ok(a), Ok(b)) => a == b,
            (Err(a), Err(b)) => a.to_string() == b.to_string(),
            _ => false,
        };
        if !same {
            mismatches.push(trial);
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(60),
        format!("{} of {trials} clouds (<= 25 points, W <= 3) differ", mismatches.len()),
        mismatches.is_empty(),
    )
}

struct Waterlike {
    hull: LowerHull,
    report: CoexistenceReport,
}

fn waterlike() -> Result<Waterlike, String> {
    let model = builtin_demo_model("waterlike").map_err(|e| e.to_string())?;
    let grid = builtin_demo_grid("waterlike").map_err(|e| e.to_string())?;
    let cloud = sample_surface(&model, &grid).map_err(|e| e.to_string())?;
    let hull = lower_convex_hull(&cloud, 1e-9).map_err(|e| e.to_string())?;
    let report = classify_facets(&hull, DEFAULT_SPACING_THRESHOLD).map_err(|e| e.to_string())?;
    Ok(Waterlike { hull, report })
}

fn waterlike_pipeline() -> Outcome {
    let t = Instant::now();
    let model = builtin_demo_model("waterlike").map_err(|e| e.to_string())?;
    let Waterlike { hull, report } = waterlike()?;
    let triples: Vec<_> = report.simplices_with_p(3).collect();
    if triples.len() != 1 {
        return Err(format!("{} three-phase facets", triples.len()));
    }
    let triple = triples[0];
    let spec = DiagramSpec::from_names(&hull.cloud.variables, &["T", "P"]).map_err(|e| e.to_string())?;
    let dual = build_diagram(&hull, &report, &spec).map_err(|e| e.to_string())?;
    let all: Vec<&Vec<f64>> = dual.regions.iter().flat_map(|r| r.cells.iter().map(|c| &c.points[0])).collect();
    let range = (0..2)
        .map(|k| {
            let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[k]), b.max(p[k])));
            hi - lo
        })
        .fold(0.0, f64::max);
    let image: Vec<&Vec<f64>> = dual
        .regions
        .iter()
        .filter(|r| r.p == 3)
        .flat_map(|r| r.cells.iter().flat_map(|c| c.points.iter()))
        .collect();
    let spread = image
        .iter()
        .flat_map(|a| image.iter().map(move |b| (a[0] - b[0]).abs().max((a[1] - b[1]).abs())))
        .fold(0.0, f64::max)
        / range;
    let mut dofs = Vec::new();
    for pair in [["liquid", "solid"], ["liquid", "vapor"], ["solid", "vapor"]] {
        let label: Vec<String> = pair.iter().map(|s| s.to_string()).collect();
        dofs.push(empirical_dof(&report, &region_label(&label), DEFAULT_RANK_TOLERANCE).dof);
    }
    let y = triple.conventional_intensive(&report.variables);
    let g: Vec<f64> = triple
        .label
        .iter()
        .map(|phase| legendre_transform(&model, phase, &["S", "V"], &y, &[]).map(|p| p.value))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (lo, hi) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let legendre = (hi - lo) / hi.abs().max(lo.abs()).max(1e-300);
    within(
        t.elapsed(),
        Duration::from_secs(30),
        format!(
            "1 three-phase facet at (T, P) = ({:.6}, {:.6}); dual spread {spread:.1e}; two-phase empirical dof {dofs:?}; Legendre spread {legendre:.1e}",
            y[0], y[1]
        ),
        image.len() == 1 && spread < 1e-6 && dofs == [1, 1, 1] && legendre < 1e-8,
    )
}

fn lever() -> Outcome {
    let Waterlike { report, .. } = waterlike()?;
    let simplices: Vec<_> = report.simplices.iter().filter(|s| s.kind == SimplexKind::Coexistence).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = simplices[rng.gen_range(0..simplices.len())];
        let raw: Vec<f64> = (0..s.vertex_x.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let target: Vec<f64> = (0..2)
            .map(|k| s.vertex_x.iter().zip(&raw).map(|(x, w)| x[k] * w / total).sum())
            .collect();
        let w = lever_rule(s, &target, 1e-12).map_err(|e| e.to_string())?;
        for k in 0..2 {
            let back: f64 = s.vertex_x.iter().zip(&w).map(|(x, w)| x[k] * w).sum();
            worst = worst.max((back - target[k]).abs() / target[k].abs().max(1.0));
        }
    }
    let vars = vec![AxisDescriptor::extensive("X")];
    let xs: Vec<f64> = (0..=40).map(|i| (f64::from(i) - 10.0) / 10.0).collect();
    let samples = xs
        .iter()
        .map(|&x| ("a", vec![x], x * x))
        .chain(xs.iter().map(|&x| ("b", vec![x], (x - 2.0) * (x - 2.0))));
    let cloud = PointCloud::from_samples(vars, samples).map_err(|e| e.to_string())?;
    let hull = lower_convex_hull(&cloud, 1e-9).map_err(|e| e.to_string())?;
    let tie = classify_facets(&hull, DEFAULT_SPACING_THRESHOLD).map_err(|e| e.to_string())?;
    let tie = tie.simplices_with_p(2).next().ok_or("no tie line")?.clone();
    let mid = lever_rule(&tie, &[1.0], 1e-12).map_err(|e| e.to_string())?;
    let symmetric = mid.iter().all(|&w| (w - 0.5).abs() <= f64::EPSILON);
    check(
        worst <= 1e-12 && symmetric,
        format!("worst relative reconstruction error {worst:.1e} over 1000 targets; midpoint weights {mid:?}"),
    )
}

fn spinodal() -> Outcome {
    let model = builtin_demo_model("doublewell").map_err(|e| e.to_string())?;
    let grid = builtin_demo_grid("doublewell").map_err(|e| e.to_string())?;
    let tol = 1e-9;
    let locus = spinodal_locus(&model, "fluid", &grid, tol).map_err(|e| e.to_string())?;
    let root = 1.0 / 3f64.sqrt();
    let err = locus.points.iter().map(|p| (p.x[0].abs() - root).abs()).fold(0.0, f64::max);
    let unstable = locus
        .points
        .iter()
        .map(|p| is_locally_stable(&model, "fluid", &p.x, tol).map(|s| !s))
        .collect::<Result<Vec<bool>, _>>()
        .map_err(|e| e.to_string())?;
    let signs: Vec<f64> = locus.points.iter().map(|p| p.x[0].signum()).collect();
    check(
        locus.points.len() == 2 && signs.contains(&1.0) && signs.contains(&-1.0) && err < 1e-6 && unstable.iter().all(|&u| u),
        format!("{} locus points, max error against 1/sqrt(3) {err:.1e}, all fail the definiteness test: {}", locus.points.len(), unstable.iter().all(|&u| u)),
    )
}

fn tree_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.map_err(|e| e.to_string())?;
            let bytes = std::fs::read(e.path()).map_err(|e| e.to_string())?;
            Ok((e.file_name().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let exe = env!("CARGO_BIN_EXE_gibbsd");
    for run in ["first", "second"] {
        let out = Command::new(exe)
            .args(["demo", "waterlike", "--out"])
            .arg(dir.path().join(run))
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("demo exited with {:?}", out.status.code()));
        }
    }
    let a = tree_bytes(&dir.path().join("first"))?;
    let b = tree_bytes(&dir.path().join("second"))?;
    let bytes: usize = a.iter().map(|(_, f)| f.len()).sum();
    check(a == b && a.len() == 5, format!("{} files, {bytes} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("phase-rule table", phase_rule_table),
        ("classic-rule equivalence", classic_equivalence),
        ("simplex face table", simplex_table),
        ("Dehn-Sommerville and Euler", dehn_somerville),
        ("upper bound theorem", upper_bound),
        ("ternary bounds", ternary),
        ("hull oracle equivalence", oracle_equivalence),
        ("waterlike pipeline", waterlike_pipeline),
        ("lever rule", lever),
        ("spinodal", spinodal),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
