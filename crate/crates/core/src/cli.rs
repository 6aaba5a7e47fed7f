//! Command-line front end. Exit codes: 0 success, 1 usage, 2 validation or
//! I/O, 3 unresolved numerical degeneracy.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::coexistence::{
    classify_facets_with, generalized_phase_rule, phases_for_dof, ClassifyOptions,
    CoexistenceReport, SimplexKind, DEFAULT_GRADIENT_TOLERANCE,
};
use crate::combinatorics::{
    cyclic_fvector, dehn_somerville_check, fvector_of_complex, fvector_of_hull, ternary_bounds,
    ubt_check, FVector,
};
use crate::diagrams::{
    build_diagram, diagram_to_csv, diagram_to_json, diagram_to_svg, slice_isopleth, DiagramSpec,
    IsoplethConstraint, PhaseDiagram,
};
use crate::error::{Error, Result};
use crate::hull::{convex_hull, lower_convex_hull_with, LowerHull, PointCloud};
use crate::io::{
    cloud_to_json, hull_to_json, import_compound_dataset, parse_cloud, parse_hull, parse_report,
    report_to_json, write_text, RunConfig,
};
use crate::models::{sample_surface, DemoSet};

#[derive(Debug, Parser)]
#[command(
    name = "gibbsd",
    version,
    about = "Phase equilibria from lower convex hulls of energy surfaces"
)]
struct Cli {
    /// Geometric tolerance; overrides the config file
    #[arg(long, global = true, value_name = "TOL")]
    tolerance: Option<f64>,
    /// Flat JSON run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file, or output directory for `demo`; stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format: text or json for reports, svg, csv or json for diagrams
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Svg,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lower convex hull of a point cloud
    Hull {
        /// Cloud JSON file
        cloud: PathBuf,
    },
    /// Coexistence report of a hull
    Classify {
        /// Hull JSON file
        hull: PathBuf,
    },
    /// Phase diagram of a hull in chosen axes
    Diagram {
        /// Hull JSON file
        hull: PathBuf,
        /// Comma-separated axis names; extensive names or their conjugates
        #[arg(long, value_delimiter = ',', required = true)]
        axes: Vec<String>,
        /// Report JSON file; classified from the hull when omitted
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Face counts of a hull with Dehn-Sommerville and upper-bound checks
    Fvector {
        /// Hull JSON file
        hull: PathBuf,
    },
    /// f-vector of the cyclic polytope c(n, d)
    Cyclic {
        /// Number of vertices
        n: usize,
        /// Dimension
        d: usize,
    },
    /// Generalized phase rule F = W - P + 1
    Rule(RuleArgs),
    /// Ternary complexity classification of every system in a dataset
    Bounds(BoundsArgs),
    /// Restricts a cloud to an affine isopleth
    Slice {
        /// Cloud JSON file
        cloud: PathBuf,
        /// Constraint row `a1,a2,...=b`; repeatable
        #[arg(long = "row", value_name = "ROW", allow_hyphen_values = true)]
        rows: Vec<String>,
    },
    /// Runs the full pipeline on a builtin model
    Demo {
        /// Demo model name
        name: String,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "target")]
struct RuleTarget {
    /// Number of coexisting phases P; prints F
    #[arg(long)]
    phases: Option<usize>,
    /// Degrees of freedom F; prints P
    #[arg(long)]
    dof: Option<usize>,
}

#[derive(Debug, Args)]
struct RuleArgs {
    /// Number of conjugate work pairs W
    #[arg(long)]
    pairs: usize,
    #[command(flatten)]
    target: RuleTarget,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Compound dataset JSON file
    #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// Classify this many random ternary datasets instead of a file
    #[arg(long, value_name = "COUNT")]
    synthetic: Option<usize>,
    /// Compounds per synthetic dataset
    #[arg(long, default_value_t = 12)]
    compounds: usize,
    /// Seed for synthetic datasets
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `argv` (including the program name) and runs it against the
/// process's stdout and stderr.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`cli_main`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.tolerance {
        config.tolerance = t;
    }
    config.validate()?;
    Ok(config)
}

fn classify_options(config: &RunConfig) -> ClassifyOptions {
    ClassifyOptions {
        spacing_threshold: config.spacing_threshold,
        gradient_tolerance: DEFAULT_GRADIENT_TOLERANCE,
    }
}

fn print(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Writes `text` to `--out` and prints `summary`, or prints `text` itself.
fn emit(cli: &Cli, out: &mut dyn Write, text: &str, summary: String) -> Result<()> {
    match &cli.out {
        Some(path) => {
            write_text(path, text)?;
            print(out, &format!("{summary}\nwrote {}\n", path.display()))
        }
        None => print(out, text),
    }
}

fn text_format(cli: &Cli) -> Result<bool> {
    match cli.format {
        None | Some(Format::Text) => Ok(true),
        Some(Format::Json) => Ok(false),
        Some(f) => Err(Error::InvalidArgument(format!(
            "format {f:?} applies to diagrams only"
        ))),
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let config = config(cli)?;
    match &cli.command {
        Command::Hull { cloud } => {
            let cloud = parse_cloud(cloud)?;
            let hull = lower_convex_hull_with(&cloud, &config.hull_options())?;
            let summary = format!(
                "{} points, {} facets, {} metastable",
                cloud.len(),
                hull.facets.len(),
                hull.metastable.len()
            );
            emit(cli, out, &hull_to_json(&hull)?, summary)
        }
        Command::Classify { hull } => {
            let hull = parse_hull(hull)?;
            let report = classify_facets_with(&hull, &classify_options(&config))?;
            emit(cli, out, &report_to_json(&report)?, report_summary(&report))
        }
        Command::Diagram { hull, axes, report } => {
            let hull = parse_hull(hull)?;
            let report = match report {
                Some(path) => parse_report(path)?,
                None => classify_facets_with(&hull, &classify_options(&config))?,
            };
            let names: Vec<&str> = axes.iter().map(String::as_str).collect();
            let spec = DiagramSpec::from_names(&hull.cloud.variables, &names)?;
            let diagram = build_diagram(&hull, &report, &spec)?;
            let text = match cli.format.unwrap_or(Format::Svg) {
                Format::Svg => diagram_to_svg(&diagram)?,
                Format::Csv => diagram_to_csv(&diagram),
                Format::Json => diagram_to_json(&diagram)?,
                Format::Text => {
                    return Err(Error::InvalidArgument(
                        "diagrams export as svg, csv or json".into(),
                    ))
                }
            };
            emit(cli, out, &text, diagram_summary(&diagram))
        }
        Command::Fvector { hull } => {
            let hull = parse_hull(hull)?;
            fvector(cli, out, &hull, &config)
        }
        Command::Cyclic { n, d } => {
            let f = cyclic_fvector(*n, *d)?;
            if text_format(cli)? {
                print(out, &format!("{f}\n"))
            } else {
                print(
                    out,
                    &format!("{}\n", json!({ "n": n, "d": d, "fvector": f.counts })),
                )
            }
        }
        Command::Rule(args) => {
            let line = match (args.target.phases, args.target.dof) {
                (Some(p), _) => format!("F = {}", generalized_phase_rule(args.pairs, p)?),
                (None, Some(f)) => format!("P = {}", phases_for_dof(args.pairs, f)?),
                (None, None) => unreachable!("clap enforces one target"),
            };
            print(out, &format!("{line}\n"))
        }
        Command::Bounds(args) => bounds(cli, out, args, &config),
        Command::Slice { cloud, rows } => {
            let cloud = parse_cloud(cloud)?;
            let constraint = parse_rows(rows, config.tolerance)?;
            let sliced = slice_isopleth(&cloud, &constraint)?;
            let summary = format!(
                "{} of {} points, {} dimensions",
                sliced.len(),
                cloud.len(),
                sliced.work_dims()
            );
            emit(cli, out, &cloud_to_json(&sliced)?, summary)
        }
        Command::Demo { name } => demo(cli, out, name, &config),
    }
}

fn report_summary(report: &CoexistenceReport) -> String {
    let counts: Vec<String> = report
        .counts_by_p
        .iter()
        .rev()
        .map(|(p, n)| format!("P={p}: {n}"))
        .collect();
    let coexistence = report
        .simplices
        .iter()
        .filter(|s| s.kind == SimplexKind::Coexistence)
        .count();
    format!(
        "{} facets, {coexistence} coexistence ({})",
        report.simplices.len(),
        counts.join(", ")
    )
}

fn diagram_summary(diagram: &PhaseDiagram) -> String {
    format!(
        "{} regions, {} cells, {} boundaries",
        diagram.regions.len(),
        diagram.cell_count(),
        diagram.boundaries.len()
    )
}

fn fvector_line(f: &FVector) -> String {
    format!("{f}")
}

fn fvector(cli: &Cli, out: &mut dyn Write, hull: &LowerHull, config: &RunConfig) -> Result<()> {
    let complex = fvector_of_hull(hull);
    let lifted: Vec<Vec<f64>> = hull
        .cloud
        .points
        .iter()
        .map(|p| p.x.iter().copied().chain([p.energy]).collect())
        .collect();
    let d = hull.work_dims() + 1;
    let boundary = fvector_of_complex(&convex_hull(&lifted, config.tolerance)?, d);
    let ds = dehn_somerville_check(&boundary);
    let n = boundary.counts[0] as usize;
    let ubt = if n <= 64 && d >= 2 && n > d {
        Some(ubt_check(&boundary, n)?)
    } else {
        None
    };
    if text_format(cli)? {
        let mut s = format!("derived surface: {}\n", fvector_line(&complex));
        s += &format!("convex hull: {} on {n} vertices\n", fvector_line(&boundary));
        let alternating: i64 = boundary
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum();
        let expected = if d % 2 == 0 { 0 } else { 2 };
        s += &format!(
            "euler: alternating sum {alternating}, expected {expected} {}\n",
            verdict(ds.euler().pass)
        );
        if ds.all_pass() {
            s += "dehn-sommerville: PASS\n";
        } else {
            s += &format!("dehn-sommerville: FAIL at k = {:?}\n", ds.failing());
        }
        match &ubt {
            Some(u) => {
                s += &format!(
                    "upper bound c({n}, {d}) = {}: {}{}\n",
                    u.cyclic,
                    verdict(u.all_pass()),
                    if u.attains_bound() { " (attained)" } else { "" }
                )
            }
            None => s += &format!("upper bound: not evaluated for n = {n}, d = {d}\n"),
        }
        print(out, &s)
    } else {
        let value = json!({
            "derived_surface": complex.counts,
            "convex_hull": boundary.counts,
            "dehn_sommerville": ds,
            "upper_bound": ubt,
        });
        print(out, &(serde_json::to_string_pretty(&value)? + "\n"))
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn bounds(cli: &Cli, out: &mut dyn Write, args: &BoundsArgs, config: &RunConfig) -> Result<()> {
    let clouds: Vec<(String, PointCloud)> = match (&args.dataset, args.synthetic) {
        (Some(path), _) => import_compound_dataset(path)?
            .into_iter()
            .map(|s| (s.name(), s.cloud))
            .collect(),
        (None, Some(count)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..count)
                .map(|i| {
                    let entries =
                        crate::synthetic::random_ternary_dataset(&mut rng, args.compounds);
                    let text = serde_json::to_string(&entries)?;
                    let system = crate::io::parse_compound_dataset(&text)?.remove(0);
                    Ok((format!("synthetic-{i}"), system.cloud))
                })
                .collect::<Result<_>>()?
        }
        (None, None) => unreachable!("clap requires a dataset or --synthetic"),
    };
    let mut rows = Vec::new();
    for (name, cloud) in clouds {
        let hull = lower_convex_hull_with(&cloud, &config.hull_options())?;
        let (f0, f2) = (hull.hull_vertices.len() as u64, hull.facets.len() as u64);
        rows.push((name, f0, f2, ternary_bounds(f0, f2)?));
    }
    if text_format(cli)? {
        let mut s = String::from("system\tf0\tf2\tclass\n");
        for (name, f0, f2, class) in &rows {
            s += &format!("{name}\t{f0}\t{f2}\t{class}\n");
        }
        print(out, &s)
    } else {
        let value: Vec<_> = rows
            .iter()
            .map(|(name, f0, f2, class)| json!({ "system": name, "f0": f0, "f2": f2, "classification": class }))
            .collect();
        print(out, &(serde_json::to_string_pretty(&value)? + "\n"))
    }
}

fn parse_rows(rows: &[String], tolerance: f64) -> Result<IsoplethConstraint> {
    let mut matrix = Vec::new();
    let mut offsets = Vec::new();
    for row in rows {
        let bad = || {
            Error::InvalidArgument(format!(
                "constraint row `{row}` is not of the form a1,a2,...=b"
            ))
        };
        let (lhs, rhs) = row.split_once('=').ok_or_else(bad)?;
        let coeffs = lhs
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?;
        matrix.push(coeffs);
        offsets.push(rhs.trim().parse::<f64>().map_err(|_| bad())?);
    }
    Ok(IsoplethConstraint::new(matrix, offsets, tolerance))
}

fn demo(cli: &Cli, out: &mut dyn Write, name: &str, config: &RunConfig) -> Result<()> {
    let demos = match &config.demo_parameters {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            DemoSet::parse(&text)?
        }
        None => DemoSet::builtin(),
    };
    let model = demos.model(name)?;
    let grid = demos.grid(name)?;
    let dir: PathBuf = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("demo-{name}")));
    let cloud = sample_surface(&model, &grid)?;
    let hull = lower_convex_hull_with(&cloud, &config.hull_options())?;
    let report = classify_facets_with(&hull, &classify_options(config))?;
    let mut written = Vec::new();
    let mut put = |file: String, text: String| -> Result<()> {
        let path = dir.join(&file);
        write_text(&path, &text)?;
        written.push(file);
        Ok(())
    };
    put("cloud.json".into(), cloud_to_json(&cloud)?)?;
    put("hull.json".into(), hull_to_json(&hull)?)?;
    put("report.json".into(), report_to_json(&report)?)?;
    let extensive: Vec<String> = model.variables.iter().map(|v| v.name.clone()).collect();
    let intensive: Vec<String> = model
        .variables
        .iter()
        .map(|v| v.intensive_name.clone())
        .collect();
    for names in [extensive, intensive] {
        let axes: Vec<&str> = names.iter().take(2).map(String::as_str).collect();
        let spec = DiagramSpec::from_names(&hull.cloud.variables, &axes)?;
        let diagram = build_diagram(&hull, &report, &spec)?;
        let stem = format!("diagram_{}", axes.join("_"));
        if axes.len() == 2 {
            put(format!("{stem}.svg"), diagram_to_svg(&diagram)?)?;
        } else {
            put(format!("{stem}.json"), diagram_to_json(&diagram)?)?;
        }
    }
    let mut s = format!(
        "demo {name}: {} points, {}\n",
        cloud.len(),
        report_summary(&report)
    );
    for file in &written {
        s += &format!("wrote {}\n", Path::new(&dir).join(file).display());
    }
    print(out, &s)
}
