use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qspline_core::bounds::{r_heuristic_branch, sup_error};
use qspline_core::harness::{
    build_for, cell_bound, run_conditioning, run_convergence, run_table, ExperimentSpec, Figure,
};
use qspline_core::{
    build_spline, DividedDiffTable, EndConditionKind, Mesh, SplineError, TestFunction,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qspline", version, about = "Cubic spline interpolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the five standard error tables.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        id: u8,
        /// Seed for the random-mesh tables (3 and 4).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interpolate `x,y` rows from a CSV file.
    Interpolate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "end-condition", value_parser = parse_kind)]
        end_condition: EndConditionKind,
        /// End values for clamped conditions: first/second derivative at both ends.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ends: Option<Vec<f64>>,
        #[arg(long, conflicts_with = "grid", allow_hyphen_values = true)]
        eval: Option<f64>,
        /// Number of equispaced evaluation points across the domain.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "export-coeffs")]
        export_coeffs: Option<PathBuf>,
    },
    /// Emit the coefficient traces behind one of the conditioning figures.
    Conditioning {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        figure: u8,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the convergence order on equidistant meshes.
    Convergence {
        #[arg(long)]
        function: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        interval: Vec<f64>,
        #[arg(long = "end-condition", value_parser = parse_kind)]
        end_condition: EndConditionKind,
        #[arg(long, value_delimiter = ',', required = true)]
        knots: Vec<usize>,
    },
    /// Measured error next to the applicable a-priori bound.
    Bounds {
        #[arg(long)]
        function: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        interval: Vec<f64>,
        #[arg(long)]
        knots: usize,
        #[arg(long = "end-condition", value_parser = parse_kind)]
        end_condition: EndConditionKind,
    },
}

fn parse_kind(s: &str) -> Result<EndConditionKind, String> {
    s.parse().map_err(|e: SplineError| e.to_string())
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<SplineError> for Failure {
    fn from(e: SplineError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table {
            id,
            seed,
            format,
            out,
        } => table(id, seed, format, out.as_deref()),
        Command::Interpolate {
            data,
            end_condition,
            ends,
            eval,
            grid,
            export_coeffs,
        } => interpolate(&data, end_condition, ends, eval, grid, export_coeffs.as_deref()),
        Command::Conditioning {
            figure,
            n,
            seed,
            out,
        } => conditioning(figure, n, seed, &out),
        Command::Convergence {
            function,
            interval,
            end_condition,
            knots,
        } => convergence(&function, &interval, end_condition, &knots),
        Command::Bounds {
            function,
            interval,
            knots,
            end_condition,
        } => bounds(&function, &interval, knots, end_condition),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn table(id: u8, seed: Option<u64>, format: Format, out: Option<&Path>) -> CliResult {
    let result = run_table(&ExperimentSpec::standard_table(id, seed)?)?;
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json() + "\n",
    };
    emit(&text, out)
}

/// Rows `x,y`; a first row that does not parse as numbers is taken as a header.
fn read_points(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Input(e.to_string()))?;
        if record.len() < 2 {
            return Err(Failure::Input(format!("row {}: expected `x,y`", line + 1)));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if line == 0 => continue,
            _ => {
                return Err(Failure::Input(format!(
                    "row {}: cannot parse `{},{}`",
                    line + 1,
                    &record[0],
                    &record[1]
                )))
            }
        }
    }
    Ok((xs, ys))
}

fn interpolate(
    data: &Path,
    kind: EndConditionKind,
    ends: Option<Vec<f64>>,
    eval: Option<f64>,
    grid: Option<usize>,
    export: Option<&Path>,
) -> CliResult {
    let (xs, ys) = read_points(data)?;
    let mesh = Mesh::new(xs)?;
    let ends = match ends.as_deref() {
        None => None,
        Some([l, r]) => Some((*l, *r)),
        Some(_) => return Err(Failure::Input("--ends expects LEFT,RIGHT".into())),
    };
    let ec = kind.with_ends(ends)?;
    let spline = build_spline(&mesh, &ys, ec)?;
    if let Some(path) = export {
        fs::write(path, spline.to_csv())?;
    }
    let mut out = String::new();
    if let Some(x) = eval {
        out = format!("x,s\n{x},{}\n", spline.eval(x, 0)?);
    } else if let Some(n) = grid {
        if n < 2 {
            return Err(Failure::Input("--grid needs at least 2 points".into()));
        }
        out.push_str("x,s\n");
        let (a, b) = (mesh.first(), mesh.last());
        for j in 0..n {
            let x = if j + 1 == n { b } else { a + (b - a) * j as f64 / (n - 1) as f64 };
            out.push_str(&format!("{x},{}\n", spline.eval(x, 0)?));
        }
    } else if export.is_none() {
        out = spline.to_csv();
    }
    emit(&out, None)
}

fn conditioning(figure: u8, n: usize, seed: Option<u64>, out: &Path) -> CliResult {
    let data = run_conditioning(Figure::from_id(figure)?, n, seed)?;
    fs::write(out, data.to_csv())?;
    Ok(())
}

fn interval(values: &[f64]) -> Result<(f64, f64), Failure> {
    match values {
        [a, b] if a < b => Ok((*a, *b)),
        [a, b] => Err(SplineError::DegenerateInterval { a: *a, b: *b }.into()),
        _ => Err(Failure::Input("--interval expects A,B".into())),
    }
}

fn convergence(function: &str, iv: &[f64], kind: EndConditionKind, knots: &[usize]) -> CliResult {
    let result = run_convergence(function, interval(iv)?, kind, knots)?;
    let text = serde_json::to_string_pretty(&result).expect("convergence result serializes");
    emit(&(text + "\n"), None)
}

fn bounds(function: &str, iv: &[f64], knots: usize, kind: EndConditionKind) -> CliResult {
    let (a, b) = interval(iv)?;
    let f = TestFunction::lookup(function)?;
    if knots < 2 {
        return Err(Failure::Input("--knots must be at least 2".into()));
    }
    let mesh = Mesh::equidistant(a, b, knots - 1)?;
    let spline = build_for(&f, &mesh, kind)?;
    let measured = sup_error(&spline, |x| f.value(x), 256);
    let bound = cell_bound(&f, &mesh, kind);
    let heuristic = if mesh.len() >= 6 {
        let table = DividedDiffTable::new(&mesh.knots()[..6], &f.sample(&mesh.knots()[..6]))?;
        let (r, branch) = r_heuristic_branch(&table)?;
        Some(json!({ "R": r, "branch": branch }))
    } else {
        None
    };
    let report = json!({
        "function": f.name,
        "interval": [a, b],
        "knots": knots,
        "end_condition": kind,
        "measured_error": measured,
        "bound": bound,
        "within_bound": bound.as_ref().map(|b| measured <= b.value),
        "heuristic_left_R": heuristic,
    });
    emit(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"), None)
}
