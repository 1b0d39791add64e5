//! Command-line front end: state files in, JSON reports and CSV sweeps out.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 the analyzed
//! state is a product state (`analyze` only; the report is still written).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::chsh::{
    chsh_value, chsh_value_via, gisin_angles, gisin_family_angles, gisin_predicted_value, BetaRule,
    ChshReport, CorrelationRoute, GisinAngles, MeasurementSettings,
};
use crate::config::{DEFAULT_FILE_NORMALIZATION_TOL, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::lhv::{lhv_max_chsh, sample_chsh, DeterministicStrategy, EmpiricalChsh};
use crate::observables::{BlochVector, SphericalAngles};
use crate::optimizer::{
    maximize_chsh, sweep_slice, AngleConfiguration, OptimizerConfig, SliceId, SweepGrid, SweepSpec,
    DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL,
};
use crate::states::{schmidt_decompose, to_canonical, BipartiteState, SchmidtDecomposition};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_ENTANGLED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "chsh",
    version,
    about = "Entanglement and CHSH violation analysis for bipartite pure states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt-decompose a state and evaluate CHSH at the violating settings.
    Analyze {
        state: PathBuf,
        #[arg(long = "rank-tol", default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Recompute the correlations with dense 4x4 matrices and report the discrepancy.
        #[arg(long)]
        verify_dense: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize CHSH numerically over all eight measurement angles.
    Optimize {
        state: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Tabulate CHSH over a lattice of measurement angles.
    Sweep {
        state: PathBuf,
        #[arg(long)]
        slice: String,
        #[arg(long)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate CHSH from simulated measurement outcomes.
    Sample {
        state: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate deterministic local strategies.
    Lhv,
}

/// On-disk state: `{"dims": [n1, n2], "amplitudes": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &BipartiteState) -> Self {
        let (n1, n2) = state.dims();
        StateFile {
            dims: [n1, n2],
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Validates shape and normalization (within 1e-8), then rescales to
    /// unit norm.
    pub fn into_state(self) -> Result<BipartiteState> {
        let [n1, n2] = self.dims;
        let amplitudes = self
            .amplitudes
            .into_iter()
            .map(|[re, im]| num_complex::Complex64::new(re, im))
            .collect();
        let state = BipartiteState::new(n1, n2, amplitudes)?;
        state.check_normalized(DEFAULT_FILE_NORMALIZATION_TOL)?;
        state.normalized()
    }
}

pub fn parse_state(text: &str) -> Result<BipartiteState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    file.into_state()
}

pub fn load_state(path: &Path) -> Result<BipartiteState> {
    let text = fs::read_to_string(path)?;
    parse_state(&text)
}

/// Pretty JSON printer that writes every float with 17 significant digits.
struct FullPrecision<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes `value` as pretty JSON with 17 significant digits per float
/// and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let formatter = FullPrecision {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub path: String,
    pub dims: [usize; 2],
}

impl InputEcho {
    fn new(path: &Path, state: &BipartiteState) -> Self {
        let (n1, n2) = state.dims();
        InputEcho {
            path: path.display().to_string(),
            dims: [n1, n2],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchmidtSummary {
    pub coefficients: Vec<f64>,
    pub rank: usize,
}

impl From<&SchmidtDecomposition> for SchmidtSummary {
    fn from(d: &SchmidtDecomposition) -> Self {
        SchmidtSummary {
            coefficients: d.coefficients.clone(),
            rank: d.rank,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalSummary {
    pub c1: f64,
    pub c2: f64,
    pub retained_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingEntry {
    pub angles: SphericalAngles,
    pub bloch: [f64; 3],
}

impl From<&BlochVector> for SettingEntry {
    fn from(v: &BlochVector) -> Self {
        SettingEntry {
            angles: v.to_angles(),
            bloch: v.components(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingsSummary {
    pub a: SettingEntry,
    pub a_prime: SettingEntry,
    pub b: SettingEntry,
    pub b_prime: SettingEntry,
}

impl From<&MeasurementSettings> for SettingsSummary {
    fn from(s: &MeasurementSettings) -> Self {
        SettingsSummary {
            a: (&s.a).into(),
            a_prime: (&s.a_prime).into(),
            b: (&s.b).into(),
            b_prime: (&s.b_prime).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GisinSummary {
    /// Polar angles in the x-z plane; negative `alpha_prime` means `-x`.
    pub plane_angles: GisinAngles,
    pub vectors: SettingsSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct Correlations {
    pub p_ab: f64,
    pub p_abp: f64,
    pub p_apb: f64,
    pub p_apbp: f64,
}

impl From<&ChshReport> for Correlations {
    fn from(r: &ChshReport) -> Self {
        Correlations {
            p_ab: r.p_ab,
            p_abp: r.p_abp,
            p_apb: r.p_apb,
            p_apbp: r.p_apbp,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DenseCheck {
    pub dense_correlations: Correlations,
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub rank_tolerance: f64,
    pub schmidt: SchmidtSummary,
    pub entangled: bool,
    pub canonical: Option<CanonicalSummary>,
    pub settings: Option<GisinSummary>,
    pub correlations: Option<Correlations>,
    pub s_value: Option<f64>,
    pub margin: Option<f64>,
    pub violated: bool,
    pub predicted_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_check: Option<DenseCheck>,
}

pub struct AnalyzeOptions {
    pub rank_tolerance: f64,
    pub verify_dense: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            rank_tolerance: DEFAULT_RANK_TOL,
            verify_dense: false,
        }
    }
}

/// Schmidt decomposition, canonical form, violating settings and CHSH
/// value. A product state yields a report with `violated = false` and no
/// settings rather than an error.
pub fn cmd_analyze(path: &Path, options: &AnalyzeOptions) -> Result<AnalyzeReport> {
    let state = load_state(path)?;
    analyze_state(&state, InputEcho::new(path, &state), options)
}

pub fn analyze_state(
    state: &BipartiteState,
    input: InputEcho,
    options: &AnalyzeOptions,
) -> Result<AnalyzeReport> {
    let decomposition = schmidt_decompose(state, options.rank_tolerance)?;
    let (dom1, dom2, _) = decomposition.dominant_pair();
    let mut report = AnalyzeReport {
        command: "analyze",
        input,
        rank_tolerance: options.rank_tolerance,
        schmidt: (&decomposition).into(),
        entangled: false,
        canonical: None,
        settings: None,
        correlations: None,
        s_value: None,
        margin: None,
        violated: false,
        predicted_value: gisin_predicted_value(dom1, dom2),
        dense_check: None,
    };
    let canonical = match to_canonical(state, options.rank_tolerance) {
        Ok(c) => c,
        Err(Error::NotEntangled(_)) => return Ok(report),
        Err(e) => return Err(e),
    };
    let (c1, c2) = (canonical.c1, canonical.c2);
    let angles = gisin_angles(c1, c2, BetaRule::Stationary)?;
    let settings = angles.settings();
    let chsh = chsh_value(c1, c2, &settings)?;

    report.entangled = true;
    report.canonical = Some(CanonicalSummary {
        c1,
        c2,
        retained_weight: canonical.retained_weight,
    });
    report.settings = Some(GisinSummary {
        plane_angles: angles,
        vectors: (&settings).into(),
    });
    report.correlations = Some((&chsh).into());
    report.s_value = Some(chsh.s_value);
    report.margin = Some(chsh.margin);
    report.violated = chsh.violated;
    report.predicted_value = gisin_predicted_value(c1, c2);
    if options.verify_dense {
        let dense = chsh_value_via(c1, c2, &settings, CorrelationRoute::Dense)?;
        let max_discrepancy = chsh
            .correlations()
            .iter()
            .zip(dense.correlations())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        report.dense_check = Some(DenseCheck {
            dense_correlations: (&dense).into(),
            max_discrepancy,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerEcho {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub lattice_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerSummary {
    pub best_s: f64,
    pub best_angles: AngleConfiguration,
    pub best_settings: SettingsSummary,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub config: OptimizerEcho,
    pub schmidt: SchmidtSummary,
    pub canonical: CanonicalSummary,
    pub predicted_value: f64,
    pub optimizer: OptimizerSummary,
    pub violated: bool,
}

fn dominant(state: &BipartiteState) -> Result<(SchmidtDecomposition, CanonicalSummary)> {
    let decomposition = schmidt_decompose(state, DEFAULT_RANK_TOL)?;
    let (c1, c2, retained_weight) = decomposition.dominant_pair();
    Ok((
        decomposition,
        CanonicalSummary {
            c1,
            c2,
            retained_weight,
        },
    ))
}

/// Numerical CHSH maximum for the two dominant Schmidt modes; defined for
/// product states too.
pub fn cmd_optimize(path: &Path, config: &OptimizerConfig) -> Result<OptimizeReport> {
    let state = load_state(path)?;
    let (decomposition, canonical) = dominant(&state)?;
    let result = maximize_chsh(canonical.c1, canonical.c2, config)?;
    Ok(OptimizeReport {
        command: "optimize",
        input: InputEcho::new(path, &state),
        config: OptimizerEcho {
            restarts: config.restarts,
            seed: config.seed,
            tol: config.tol,
            max_iter: config.max_iter,
            lattice_points: config.lattice_points,
        },
        schmidt: (&decomposition).into(),
        predicted_value: gisin_predicted_value(canonical.c1, canonical.c2),
        canonical,
        violated: result.best_s > 2.0 + crate::config::DEFAULT_VERDICT_TOL,
        optimizer: OptimizerSummary {
            best_s: result.best_s,
            best_angles: result.best_angles,
            best_settings: (&result.best_settings).into(),
            restarts_used: result.restarts_used,
            evaluations: result.evaluations,
            converged: result.converged,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub command: &'static str,
    pub input: InputEcho,
    pub slice: SliceId,
    pub resolution: usize,
    pub c1: f64,
    pub c2: f64,
    pub cells: usize,
    pub max_s: f64,
    pub violated_cells: usize,
    pub csv: String,
}

/// CSV text: header, then one row per cell in lexicographic index order.
pub fn sweep_csv(grid: &SweepGrid) -> String {
    let spec = grid.spec();
    let axes = grid.slice.axes();
    let mut out = String::new();
    let idx: Vec<String> = (1..=axes).map(|k| format!("idx{k}")).collect();
    let ang: Vec<String> = (1..=axes).map(|k| format!("angle{k}")).collect();
    out.push_str(&format!("{},{},S,violated\n", idx.join(","), ang.join(",")));
    for cell in 0..grid.len() {
        let indices = spec.cell_indices(cell);
        let mut fields: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
        fields.extend(indices.iter().map(|&i| fmt_f64(spec.axis_value(i))));
        fields.push(fmt_f64(grid.s_values[cell]));
        fields.push(if grid.violated[cell] { "1" } else { "0" }.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn cmd_sweep(path: &Path, slice: &str, resolution: usize, out: &Path) -> Result<SweepSummary> {
    let slice: SliceId = slice.parse()?;
    let spec = SweepSpec::new(slice, resolution)?;
    let state = load_state(path)?;
    let (_, canonical) = dominant(&state)?;
    let grid = sweep_slice(canonical.c1, canonical.c2, &spec)?;
    fs::write(out, sweep_csv(&grid))?;
    Ok(SweepSummary {
        command: "sweep",
        input: InputEcho::new(path, &state),
        slice,
        resolution,
        c1: canonical.c1,
        c2: canonical.c2,
        cells: grid.len(),
        max_s: grid.max().1,
        violated_cells: grid.violated.iter().filter(|&&v| v).count(),
        csv: out.display().to_string(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub n_per_pair: u64,
    pub seed: u64,
    pub canonical: CanonicalSummary,
    /// False when the state is a product and the limiting settings
    /// (`β = 0`, `β' = π`) are used.
    pub entangled: bool,
    pub settings: GisinSummary,
    pub exact_s: f64,
    pub empirical: EmpiricalChsh,
}

pub fn cmd_sample(path: &Path, n_per_pair: u64, seed: u64) -> Result<SampleReport> {
    if n_per_pair == 0 {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    let state = load_state(path)?;
    let (decomposition, canonical) = dominant(&state)?;
    let entangled = decomposition.second_coefficient() > DEFAULT_RANK_TOL;
    let (c1, c2) = if entangled {
        (canonical.c1, canonical.c2)
    } else {
        (1.0, 0.0)
    };
    let angles = gisin_family_angles(c1, c2, BetaRule::Stationary);
    let settings = angles.settings();
    let exact_s = chsh_value(c1, c2, &settings)?.s_value;
    let empirical = sample_chsh(c1, c2, &settings, n_per_pair, seed)?;
    Ok(SampleReport {
        command: "sample",
        input: InputEcho::new(path, &state),
        n_per_pair,
        seed,
        canonical: CanonicalSummary {
            c1,
            c2,
            ..canonical
        },
        entangled,
        settings: GisinSummary {
            plane_angles: angles,
            vectors: (&settings).into(),
        },
        exact_s,
        empirical,
    })
}

/// Maximum line followed by the strategy table.
pub fn cmd_lhv() -> String {
    let mut out = format!("max {}\n", lhv_max_chsh());
    out.push_str("a,a_prime,b,b_prime,S\n");
    for s in DeterministicStrategy::all() {
        let [a, ap, b, bp] = s.outcomes;
        out.push_str(&format!("{a:+},{ap:+},{b:+},{bp:+},{}\n", s.chsh()));
    }
    out
}

/// Parses `args` (including the program name), runs the command, writes to
/// `stdout`/`stderr`, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_INPUT
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Analyze {
            state,
            rank_tol,
            verify_dense,
            out,
        } => {
            let report = cmd_analyze(
                &state,
                &AnalyzeOptions {
                    rank_tolerance: rank_tol,
                    verify_dense,
                },
            )?;
            let json = to_json(&report);
            match out {
                Some(path) => fs::write(path, json)?,
                None => stdout.write_all(json.as_bytes())?,
            }
            Ok(if report.entangled {
                EXIT_OK
            } else {
                EXIT_NOT_ENTANGLED
            })
        }
        Command::Optimize {
            state,
            restarts,
            seed,
            tol,
            max_iter,
        } => {
            let config = OptimizerConfig {
                restarts,
                seed,
                tol,
                max_iter,
                ..Default::default()
            };
            stdout.write_all(to_json(&cmd_optimize(&state, &config)?).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            state,
            slice,
            resolution,
            out,
        } => {
            stdout.write_all(to_json(&cmd_sweep(&state, &slice, resolution, &out)?).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Sample { state, n, seed } => {
            stdout.write_all(to_json(&cmd_sample(&state, n, seed)?).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Lhv => {
            stdout.write_all(cmd_lhv().as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_have_seventeen_digits() {
        let text = to_json(&vec![0.1, 2.0, -1.0 / 3.0]);
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("2.0000000000000000e0"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![0.1, 2.0, -1.0 / 3.0]);
    }

    #[test]
    fn non_finite_floats_become_null() {
        let text = to_json(&vec![f64::INFINITY]);
        assert!(text.contains("null"));
    }

    #[test]
    fn state_file_validation() {
        assert!(matches!(parse_state("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_state(r#"{"dims":[2,2],"amplitudes":[[1,0]]}"#),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            parse_state(r#"{"dims":[1,2],"amplitudes":[[1,0],[1,0]]}"#),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            parse_state(r#"{"dims":[1,1],"amplitudes":[[1,0]],"extra":1}"#),
            Err(Error::Parse(_))
        ));
        // within 1e-8 is accepted and renormalized
        let s = parse_state(r#"{"dims":[1,2],"amplitudes":[[1.000000001,0],[0,0]]}"#).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lhv_table_shape() {
        let text = cmd_lhv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "max 2");
        assert_eq!(lines.len(), 18);
        assert!(lines[2..]
            .iter()
            .all(|l| l.ends_with(",2") || l.ends_with(",-2")));
    }
}
