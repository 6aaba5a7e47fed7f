use gibbsd::coexistence::{classify_facets, CoexistenceReport, SimplexKind, DEFAULT_SPACING_THRESHOLD};
use gibbsd::diagrams::{
    build_diagram, diagram_from_json, diagram_to_csv, diagram_to_json, diagram_to_svg,
    dual_intensive, legendre_transform, mixed_axes, project_extensive, slice_isopleth,
    DiagramMetadata, DiagramSpec, IsoplethConstraint, PhaseDiagram, Representation,
};
use gibbsd::hull::{lower_convex_hull, AxisDescriptor, LowerHull, PointCloud};
use gibbsd::io::parse_compound_dataset;
use gibbsd::models::{builtin_demo_grid, builtin_demo_model, sample_surface, AnalyticModel};
use gibbsd::synthetic::random_ternary_dataset;
use gibbsd::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::OnceLock;

struct Demo {
    model: AnalyticModel,
    hull: LowerHull,
    report: CoexistenceReport,
}

fn waterlike() -> &'static Demo {
    static DEMO: OnceLock<Demo> = OnceLock::new();
    DEMO.get_or_init(|| {
        let model = builtin_demo_model("waterlike").unwrap();
        let cloud = sample_surface(&model, &builtin_demo_grid("waterlike").unwrap()).unwrap();
        let hull = lower_convex_hull(&cloud, 1e-9).unwrap();
        let report = classify_facets(&hull, DEFAULT_SPACING_THRESHOLD).unwrap();
        Demo { model, hull, report }
    })
}

fn with_axes(names: &[&str]) -> PhaseDiagram {
    let d = waterlike();
    let spec = DiagramSpec::from_names(&d.hull.cloud.variables, names).unwrap();
    build_diagram(&d.hull, &d.report, &spec).unwrap()
}

/// Singular values of the centered point set, largest first.
fn spread(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let w = points[0].len();
    let mean: Vec<f64> = (0..w).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
    let m = DMatrix::from_fn(n, w, |i, k| points[i][k] - mean[k]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[test]
fn extensive_diagram_has_seven_regions() {
    let d = with_axes(&["S", "V"]);
    assert_eq!(d.regions.len(), 7);
    let by_p = |p| d.regions.iter().filter(|r| r.p == p).count();
    assert_eq!((by_p(1), by_p(2), by_p(3)), (3, 3, 1));
    let triple = d.region(&["liquid", "solid", "vapor"]).unwrap();
    assert_eq!(triple.cells.len(), 1);
    assert_eq!(triple.cells[0].points.len(), 3);
    assert_eq!(d.metadata.extensive_dof, 2);
    // the triple triangle touches each two-phase strip along one edge
    for pair in [["liquid", "solid"], ["liquid", "vapor"], ["solid", "vapor"]] {
        let key = vec![pair.iter().map(|s| s.to_string()).collect::<Vec<_>>(), triple.label.clone()];
        let mut sorted = key.clone();
        sorted.sort();
        assert!(d.boundaries.iter().any(|b| b.between == sorted), "{pair:?}");
    }
    for b in &d.boundaries {
        assert_ne!(b.between[0], b.between[1]);
    }
}

#[test]
fn intensive_diagram_collapses_the_triple_point() {
    let d = with_axes(&["T", "P"]);
    let triple = d.region(&["liquid", "solid", "vapor"]).unwrap();
    assert_eq!(triple.cells.len(), 1);
    assert_eq!(triple.cells[0].points.len(), 1);
    let y = &triple.cells[0].points[0];
    assert!((y[0] - 2.6).abs() < 1e-9 && (y[1] - 2.4).abs() < 1e-9);
    assert!(d.metadata.resolution_dependent);
    let all: Vec<Vec<f64>> = d.regions.iter().flat_map(|r| r.cells.iter().map(|c| c.points[0].clone())).collect();
    let range = spread(&all)[0];
    for r in d.regions.iter().filter(|r| r.kind == SimplexKind::Coexistence) {
        let points: Vec<Vec<f64>> = r.cells.iter().map(|c| c.points[0].clone()).collect();
        match r.f {
            0 => {
                let s = spread(&points);
                assert!(s[0] <= 1e-6 * range);
            }
            1 => {
                let s = spread(&points);
                assert!(s[1] < 1e-3 * s[0], "{:?}: {s:?}", r.label);
                let boundary = d.boundaries.iter().find(|b| b.family.as_ref() == Some(&r.label)).unwrap();
                let traced: usize = boundary.polylines.iter().map(Vec::len).sum();
                assert_eq!(traced, r.cells.len());
            }
            f => panic!("unexpected F = {f}"),
        }
    }
}

#[test]
fn projection_and_dual_share_facets() {
    let d = waterlike();
    let ext = with_axes(&["S", "V"]);
    let dual = with_axes(&["T", "P"]);
    for (a, b) in ext.regions.iter().zip(&dual.regions) {
        assert_eq!(a.label, b.label);
        let ids = |r: &gibbsd::diagrams::Region| r.cells.iter().map(|c| c.facet_id).collect::<Vec<_>>();
        assert_eq!(ids(a), ids(b));
        let group = d.report.groups.iter().find(|g| g.label == a.label && g.kind == a.kind).unwrap();
        assert_eq!(ids(a), group.facet_ids);
    }
    assert_eq!(ext.cell_count(), d.hull.facets.len());
}

#[test]
fn sign_map_is_exact() {
    let d = waterlike();
    let dual = with_axes(&["T", "P"]);
    for r in &dual.regions {
        for c in &r.cells {
            let raw = &d.report.simplices[c.facet_id].intensive;
            assert_eq!(c.points[0], vec![raw[0], -raw[1]]);
        }
    }
}

#[test]
fn mixed_triple_cell_is_an_isothermal_segment() {
    let d = with_axes(&["T", "V"]);
    assert_eq!(d.metadata.extensive_dof, 1);
    let triple = d.region(&["liquid", "solid", "vapor"]).unwrap();
    let pts = &triple.cells[0].points;
    assert!(pts.iter().all(|p| p[0] == pts[0][0]));
    let vs: BTreeSet<u64> = pts.iter().map(|p| p[1].to_bits()).collect();
    assert!(vs.len() >= 2);
    assert!(d.boundaries.is_empty());
}

#[test]
fn axis_errors() {
    let d = waterlike();
    assert!(matches!(
        DiagramSpec::from_names(&d.hull.cloud.variables, &["S", "mu"]),
        Err(Error::AxisUnknown(_))
    ));
    let spec = DiagramSpec::new(&[("T", Representation::Intensive)]);
    assert!(project_extensive(&d.hull, &d.report, &spec).is_err());
    let spec = DiagramSpec::new(&[("S", Representation::Extensive)]);
    assert!(dual_intensive(&d.hull, &d.report, &spec).is_err());
    let spec = DiagramSpec::new(&[("Q", Representation::Extensive), ("T", Representation::Intensive)]);
    assert!(matches!(mixed_axes(&d.hull, &d.report, &spec), Err(Error::AxisUnknown(_))));
}

#[test]
fn legendre_potentials_agree_on_every_coexistence_facet() {
    let d = waterlike();
    let (lo, hi) = d.hull.cloud.energy_range();
    for s in d.report.simplices.iter().filter(|s| s.kind == SimplexKind::Coexistence) {
        let y = s.conventional_intensive(&d.report.variables);
        let g: Vec<f64> = s
            .label
            .iter()
            .map(|phase| legendre_transform(&d.model, phase, &["S", "V"], &y, &[]).unwrap().value)
            .collect();
        let (min, max) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(max - min <= 1e-8 * (hi - lo), "facet {}: {g:?}", s.facet_id);
        // the continuum infimum never exceeds the sampled tangent intercept
        assert!(g[0] <= s.offset + 1e-8 * (hi - lo));
    }
}

#[test]
fn helmholtz_plus_pv_is_gibbs() {
    let d = waterlike();
    let full = legendre_transform(&d.model, "liquid", &["T", "P"], &[2.6, 2.4], &[]).unwrap();
    let partial = legendre_transform(&d.model, "liquid", &["T"], &[2.6], &[full.x[1]]).unwrap();
    assert!((partial.value + 2.4 * full.x[1] - full.value).abs() < 1e-9);
}

#[test]
fn empty_diagram_renders_axes_only() {
    let diagram = PhaseDiagram {
        spec: DiagramSpec::new(&[("S", Representation::Extensive), ("V", Representation::Extensive)]),
        regions: Vec::new(),
        boundaries: Vec::new(),
        metadata: DiagramMetadata {
            facets: 0,
            intensive_axes: 0,
            extensive_dof: 2,
            resolution_dependent: false,
        },
    };
    let svg = diagram_to_svg(&diagram).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert!(svg.contains("class=\"axes\""));
    assert!(!svg.contains("class=\"region\""));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn svg_has_one_group_per_region_and_is_deterministic() {
    let d = with_axes(&["S", "V"]);
    let svg = diagram_to_svg(&d).unwrap();
    assert_eq!(svg.matches("class=\"region\"").count(), 7);
    assert_eq!(svg, diagram_to_svg(&with_axes(&["S", "V"])).unwrap());
    let one = with_axes(&["S"]);
    assert!(matches!(diagram_to_svg(&one), Err(Error::UnsupportedAxisCount(1))));
}

#[test]
fn csv_boundaries_match_json() {
    let d = with_axes(&["S", "V"]);
    let back = diagram_from_json(&diagram_to_json(&d).unwrap()).unwrap();
    assert_eq!(back, d);
    let csv = diagram_to_csv(&d);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("boundary,polyline,vertex,S,V,between"));
    for line in lines {
        let f: Vec<&str> = line.splitn(6, ',').collect();
        let (b, l, v): (usize, usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        let p = &back.boundaries[b].polylines[l][v];
        assert_eq!(vec![f[3].parse::<f64>().unwrap(), f[4].parse::<f64>().unwrap()], *p);
    }
}

#[test]
fn single_composition_slice_keeps_polymorphs() {
    let vars = vec![AxisDescriptor::extensive("x_C"), AxisDescriptor::extensive("x_Ca")];
    let cloud = PointCloud::from_samples(
        vars,
        [
            ("calcite", vec![0.2, 0.2], -2.5),
            ("aragonite", vec![0.2, 0.2], -2.49),
            ("CaO", vec![0.0, 0.5], -3.3),
            ("CO2", vec![1.0 / 3.0, 0.0], -1.4),
        ],
    )
    .unwrap();
    let c = IsoplethConstraint::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.2, 0.2], 1e-9);
    let sliced = slice_isopleth(&cloud, &c).unwrap();
    assert_eq!(sliced.work_dims(), 0);
    assert_eq!(sliced.len(), 2);
    let hull = lower_convex_hull(&sliced, 1e-9).unwrap();
    assert_eq!(hull.hull_vertices, vec![0]);
    assert_eq!(hull.metastable, vec![1]);
}

#[test]
fn pseudo_binary_isopleth() {
    let text = include_str!("fixtures/ca_c_o.json");
    let system = parse_compound_dataset(text).unwrap().remove(0);
    let cloud = &system.cloud;
    let at = |name: &str| cloud.points.iter().find(|p| p.phase == name).unwrap().x.clone();
    let (a, b) = (at("CaO"), at("CO2"));
    // the line through CaO and CO2: n . x = n . a
    let n = vec![b[1] - a[1], a[0] - b[0]];
    let offset = n[0] * a[0] + n[1] * a[1];
    let sliced = slice_isopleth(cloud, &IsoplethConstraint::new(vec![n], vec![offset], 1e-9)).unwrap();
    let names: BTreeSet<&str> = sliced.points.iter().map(|p| p.phase.as_str()).collect();
    assert!(["CaO", "CO2", "CaCO3"].iter().all(|s| names.contains(s)));
    let sub = lower_convex_hull(&sliced, 1e-9).unwrap();
    let on_sub: BTreeSet<&str> = sub.hull_vertices.iter().map(|&i| sub.point(i).unwrap().phase.as_str()).collect();
    assert_eq!(on_sub, BTreeSet::from(["CO2", "CaCO3", "CaO"]));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn binary_edge_slice_matches_the_full_hull(seed in any::<u64>()) {
        let entries = random_ternary_dataset(&mut ChaCha8Rng::seed_from_u64(seed), 14);
        let system = parse_compound_dataset(&serde_json::to_string(&entries).unwrap()).unwrap().remove(0);
        let full = lower_convex_hull(&system.cloud, 1e-9).unwrap();
        let edge = IsoplethConstraint::new(vec![vec![1.0, 1.0]], vec![1.0], 1e-9);
        let sliced = slice_isopleth(&system.cloud, &edge).unwrap();
        let sub = lower_convex_hull(&sliced, 1e-9).unwrap();
        let (lo, hi) = system.cloud.energy_range();
        let slack = 1e-9 * (hi - lo).max(1.0);
        // closure: the sub-hull never dips below the full derived surface
        for f in &sub.facets {
            let pts = sub.facet_points(f);
            let mid: Vec<f64> = (0..2)
                .map(|k| pts.iter().map(|p| full.point(p.index).unwrap().x[k]).sum::<f64>() / 2.0)
                .collect();
            let e_sub = pts.iter().map(|p| p.energy).sum::<f64>() / 2.0;
            prop_assert!(e_sub + slack >= full.envelope_energy(&mid).unwrap());
        }
        // restriction: on a boundary edge the stable sets coincide
        let on_edge: BTreeSet<usize> = full
            .hull_vertices
            .iter()
            .copied()
            .filter(|&i| (full.point(i).unwrap().x.iter().sum::<f64>() - 1.0).abs() < 1e-9)
            .collect();
        prop_assert_eq!(on_edge, sub.hull_vertices.iter().copied().collect::<BTreeSet<_>>());
    }
}
