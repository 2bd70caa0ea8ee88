use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use distacc::evaluation::{
    run_sweep, simulate as run_simulation, strategy_cost, sweep_to_csv, sweep_to_json, CostMethod, CostOptions,
    Family, GridPoint, MethodChoice, SweepSpec,
};
use distacc::graphs::GraphFile;
use distacc::model::{load_controller, load_plant, save_controller, validate_plant};
use distacc::synthesis::{pi_gains, synthesize as synth};
use distacc::{DirectedGraph, Error, Plant, StrategyKind};
use serde::Serialize;

/// Why a command failed, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    /// Validation ran and reported problems (already printed).
    Invalid,
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_io_or_parse() => 2,
            Failure::Lib(e) if e.is_numerical() => 3,
            Failure::Lib(_) | Failure::Invalid => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => e.fmt(f),
            Failure::Invalid => f.write_str("plant failed validation"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn load_graph(path: &Path) -> Result<DirectedGraph, Error> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file: GraphFile = serde_json::from_str(&text)?;
    DirectedGraph::try_from(file)
}

fn plant_and_graph(plant: &Path, graph: Option<&Path>) -> Result<(Plant, DirectedGraph), Error> {
    let p = load_plant(plant)?;
    let g = match graph {
        Some(path) => load_graph(path)?,
        None => DirectedGraph::from_sparsity(&p.a, 0.0),
    };
    if g.node_count() != p.n() {
        return Err(Error::Dimension {
            field: "graph".into(),
            expected: p.n(),
            found: g.node_count(),
        });
    }
    Ok((p, g))
}

/// Write `text` to `out`, or to stdout when `out` is `None`.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn validate(plant: &Path, graph: Option<&Path>) -> Outcome {
    let (p, g) = plant_and_graph(plant, graph)?;
    let report = validate_plant(&p, &g);
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Invalid)
    }
}

pub fn synthesize(
    plant: &Path,
    graph: Option<&Path>,
    kind: StrategyKind,
    out: Option<&Path>,
    gains_out: Option<&Path>,
    opts: &CostOptions,
) -> Outcome {
    let (p, g) = plant_and_graph(plant, graph)?;
    if gains_out.is_some() && kind != StrategyKind::ProportionalIntegral {
        return Err(Error::InvalidArgument("--gains-out needs --strategy pi".into()).into());
    }
    let k = synth(&p, &g, kind, &opts.dare)?;
    match out {
        Some(path) => save_controller(&k, path)?,
        None => emit(None, &format!("{}\n", distacc::model::controller_to_json(&k)))?,
    }
    if let Some(path) = gains_out {
        emit(Some(path), &to_json(&pi_gains(&p)?))?;
    }
    let pattern = k.sparsity(0.0);
    let allowed = g.with_self_loops();
    let extra = allowed.missing_edges(&pattern)?;
    eprintln!("{kind}: controller order {}, {} subsystems", k.n_state(), k.n());
    eprintln!(
        "sparsity: {} nonzero transfer entries; {}",
        pattern.adjacency().iter().filter(|&&e| e).count(),
        if extra.is_empty() {
            "within the plant graph".to_string()
        } else {
            format!("{} outside the plant graph", extra.len())
        }
    );
    Ok(())
}

#[derive(Serialize)]
struct CostOutput {
    strategy: StrategyKind,
    value: f64,
    method: CostMethod,
    converged: bool,
    horizon_used: usize,
}

pub fn cost(plant: &Path, graph: Option<&Path>, kind: StrategyKind, method: MethodChoice, opts: &CostOptions) -> Outcome {
    let (p, g) = plant_and_graph(plant, graph)?;
    let report = strategy_cost(&p, &g, kind, method, opts)?;
    emit(
        None,
        &to_json(&CostOutput {
            strategy: kind,
            value: report.value,
            method: report.method,
            converged: report.converged,
            horizon_used: report.horizon_used,
        }),
    )?;
    eprintln!("{kind}: J = {}", report.value);
    Ok(())
}

pub fn ratio(plant: &Path, graph: Option<&Path>, kind: StrategyKind, opts: &CostOptions) -> Outcome {
    let (p, g) = plant_and_graph(plant, graph)?;
    let report = distacc::evaluation::ratio(&p, &g, kind, opts)?;
    emit(None, &to_json(&report))?;
    eprintln!(
        "{kind}: ratio {} (bound {}, {})",
        report.ratio,
        report.bound,
        if report.within_bound { "within" } else { "EXCEEDED" }
    );
    Ok(())
}

pub fn simulate(plant: &Path, controller: &Path, horizon: usize, out: Option<&Path>) -> Outcome {
    let p = load_plant(plant)?;
    let k = load_controller(controller)?;
    let t = run_simulation(&p, &k, horizon)?;
    emit(out, &t.to_csv())?;
    eprintln!("simulated {} steps, cost over horizon {}", horizon, t.total_cost());
    Ok(())
}

fn parse_number(field: &str, text: &str) -> Result<f64, Error> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{field}: `{text}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { field: field.into() })
    }
}

/// `"10,100"` or `"1:2,3:4"`.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>, Error> {
    let points = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|item| match item.split_once(':') {
            Some((r, s)) => Ok(GridPoint::rs(parse_number("grid", r)?, parse_number("grid", s)?)),
            None => Ok(GridPoint::r(parse_number("grid", item)?)),
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    Ok(points)
}

fn parse_strategies(text: &str) -> Result<Vec<StrategyKind>, Error> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse())
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    family: Family,
    eps: f64,
    grid: &str,
    strategies: &str,
    out: Option<&Path>,
    json: Option<&Path>,
    jobs: Option<usize>,
    opts: &CostOptions,
) -> Outcome {
    let spec = SweepSpec {
        family,
        eps,
        grid: parse_grid(grid)?,
        strategies: parse_strategies(strategies)?,
    };
    let rows = run_sweep(&spec, opts, jobs)?;
    emit(out, &sweep_to_csv(&rows))?;
    if let Some(path) = json {
        let mut text = sweep_to_json(&rows);
        text.push('\n');
        emit(Some(path), &text)?;
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let worst = rows.iter().filter_map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    eprintln!(
        "{family}: {} rows ({failed} failed), max ratio {worst}, bound {}",
        rows.len(),
        distacc::evaluation::ratio_bound(eps)
    );
    Ok(())
}
