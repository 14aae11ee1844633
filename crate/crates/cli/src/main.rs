use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bm_analysis::fit::{AnsatzDatum, ThresholdDatum};
use bm_analysis::montecarlo::{family_str, parse_family, NoiseAxis, SweepGrid};
use bm_analysis::overhead::{physical_from_cnot, Coefficients, CSS_X_REFERENCE, CSS_Z_REFERENCE, XY_REFERENCE};
use bm_analysis::{
    fit_ansatz, fit_exponent_scaling, fit_threshold, load_checkpoint, run_points, solve_overhead, spam_ratio, z_distance_scan, AnsatzFamily, CodeSpec,
    DecoderSpec, MonteCarloPoint, OverheadModel, PointSpec,
};
use bm_core::circuit::{attach_noise, build_memory_experiment, Circuit, MemoryBasis, NoiseModel, Spam};
use bm_core::dem::build_dem;
use bm_core::sampler::{sample, ShotBatch};
use bm_decode::{BpVariant, Decoder, DecoderKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bmatch", version, about = "Surface-code memory experiments with belief-matching decoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a code layout.
    BuildCode {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print the noisy memory circuit or its detector error model.
    Dem {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Print the circuit instead of the DEM.
        #[arg(long)]
        circuit: bool,
        /// Decompose hyperedges into graphlike parts.
        #[arg(long)]
        decompose: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample detector and observable flips.
    Sample {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ShotFormat::B8)]
        shot_format: ShotFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode sampled shots (b8 file from `sample` with the same experiment flags).
    Decode {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        decoder: DecoderArgs,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo sweep over sizes, noise strengths, biases and decoders.
    Sweep(SweepArgs),
    /// Critical-exponent threshold fit of sweep output.
    FitThreshold {
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Below-threshold ansatz fit of sweep output.
    FitAnsatz {
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Qubits per logical qubit needed to reach a target logical error rate.
    Overhead {
        #[arg(long, value_enum)]
        model: OverheadArg,
        /// CNOT infidelities, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.001")]
        p_cx: Vec<f64>,
        #[arg(long, default_value_t = 100.0)]
        eta: f64,
        #[arg(long, default_value_t = 1e-12)]
        target: f64,
        /// Ansatz coefficients `a,b` (xy) or `ax,bx,az,bz` (CSS); defaults to the reference fits.
        #[arg(long, value_delimiter = ',')]
        coefficients: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Z-type distance of the XY code for odd L up to a maximum.
    Zdist {
        #[arg(long, default_value_t = 21)]
        l_max: usize,
        #[arg(long)]
        deformed: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Logical error rate with noisy SPAM over that with perfect SPAM.
    SpamRatio {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        decoder: DecoderArgs,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long, default_value = "css")]
    code: String,
    #[arg(short = 'L', long = "size")]
    l: Option<usize>,
    #[arg(long)]
    dx: Option<usize>,
    #[arg(long)]
    dz: Option<usize>,
}

impl CodeArgs {
    fn spec(&self) -> Result<CodeSpec> {
        let family = parse_family(&self.code)?;
        let (dx, dz) = match (self.l, self.dx, self.dz) {
            (Some(l), None, None) => (l, l),
            (None, Some(dx), Some(dz)) => (dx, dz),
            _ => bail!("give either -L or both --dx and --dz"),
        };
        Ok(CodeSpec { family, d_x: dx, d_z: dz })
    }
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Physical noise strength.
    #[arg(short = 'p', long, default_value_t = 0.001)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Defaults to max(d_x, d_z).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = SpamArg::Noisy)]
    spam: SpamArg,
}

impl ExperimentArgs {
    fn circuit(&self) -> Result<(CodeSpec, usize, Circuit)> {
        let code = self.code.spec()?;
        let rounds = self.rounds.unwrap_or_else(|| code.default_rounds());
        let ideal = build_memory_experiment(&code.layout()?, rounds, MemoryBasis::X, self.spam.into())?;
        Ok((code, rounds, attach_noise(&ideal, &NoiseModel::new(self.p, self.eta)?)))
    }
}

#[derive(Args, Clone)]
struct DecoderArgs {
    #[arg(long, default_value = "belief-matching")]
    decoder: String,
    #[arg(long, default_value_t = 30)]
    bp_iters: usize,
    #[arg(long, default_value = "sum-product")]
    bp_variant: String,
    /// Scale factor for min-sum messages.
    #[arg(long, default_value_t = 1.0)]
    min_sum_scale: f64,
}

impl DecoderArgs {
    fn spec_for(&self, kind: DecoderKind) -> Result<DecoderSpec> {
        let variant: BpVariant = self.bp_variant.parse()?;
        Ok(DecoderSpec { kind, bp_max_iter: self.bp_iters, bp_variant: variant, min_sum_scale: self.min_sum_scale })
    }

    fn specs(&self) -> Result<Vec<DecoderSpec>> {
        self.decoder.split(',').map(|d| self.spec_for(d.trim().parse()?)).collect()
    }

    fn spec(&self) -> Result<DecoderSpec> {
        match self.specs()?.as_slice() {
            [one] => Ok(*one),
            _ => bail!("give exactly one decoder"),
        }
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "css")]
    code: String,
    /// Square sizes, comma separated.
    #[arg(short = 'L', long = "sizes", value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Rectangular shapes `dx:dz`, comma separated (CSS only).
    #[arg(long, value_delimiter = ',')]
    shapes: Vec<String>,
    /// Noise values, comma separated.
    #[arg(short = 'p', long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    /// Interpret `-p` as CNOT infidelities instead of physical strengths.
    #[arg(long)]
    p_cx: bool,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    eta: Vec<f64>,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = SpamArg::Noisy)]
    spam: SpamArg,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON-lines checkpoint; finished points are reused on rerun.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SelectArgs {
    /// Sweep output: JSON array or JSON lines.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShotFormat {
    B8,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpamArg {
    Perfect,
    Noisy,
}

impl From<SpamArg> for Spam {
    fn from(s: SpamArg) -> Self {
        match s {
            SpamArg::Perfect => Spam::Perfect,
            SpamArg::Noisy => Spam::Noisy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Xy,
    RectX,
    RectZ,
    /// Free-exponent fit of the square ansatz.
    Exponent,
}

#[derive(Clone, Copy, ValueEnum)]
enum OverheadArg {
    Xy,
    SquareCss,
    RectCss,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

const POINT_COLUMNS: [&str; 17] =
    ["code", "family", "d_x", "d_z", "decoder", "p", "p_cx", "eta", "rounds", "spam", "shots", "failures", "rate", "std_error", "wilson_lo", "wilson_hi", "seed"];

fn point_row(p: &MonteCarloPoint) -> Vec<String> {
    let s = &p.spec;
    let (lo, hi) = p.interval(1.96);
    vec![
        s.code.to_string(),
        family_str(s.code.family).to_string(),
        s.code.d_x.to_string(),
        s.code.d_z.to_string(),
        s.decoder.kind.to_string(),
        s.p.to_string(),
        p.p_cx.to_string(),
        s.eta.to_string(),
        s.rounds.to_string(),
        format!("{:?}", s.spam).to_lowercase(),
        s.shots.to_string(),
        p.failures.to_string(),
        p.rate().to_string(),
        p.std_error().to_string(),
        lo.to_string(),
        hi.to_string(),
        s.seed.to_string(),
    ]
}

fn points_output(points: &[MonteCarloPoint], format: Format) -> Result<String> {
    match format {
        Format::Json => json(&points),
        Format::Csv => Ok(csv_table(&POINT_COLUMNS, points.iter().map(point_row))),
    }
}

fn read_points(select: &SelectArgs) -> Result<Vec<MonteCarloPoint>> {
    let text = fs::read_to_string(&select.input).with_context(|| format!("reading {}", select.input.display()))?;
    let all: Vec<MonteCarloPoint> = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) => load_checkpoint(&select.input)?,
    };
    let decoder: Option<DecoderKind> = select.decoder.as_deref().map(str::parse).transpose()?;
    let family = select.code.as_deref().map(parse_family).transpose()?;
    let points: Vec<MonteCarloPoint> = all
        .into_iter()
        .filter(|p| decoder.map_or(true, |d| p.spec.decoder.kind == d))
        .filter(|p| family.map_or(true, |f| p.spec.code.family == f))
        .filter(|p| select.eta.map_or(true, |e| p.spec.eta == e))
        .collect();
    if points.is_empty() {
        bail!("no points in {} match the selection", select.input.display());
    }
    Ok(points)
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let family = parse_family(&args.code)?;
    let mut codes: Vec<CodeSpec> = args.sizes.iter().map(|&l| CodeSpec::square(family, l)).collect();
    for shape in &args.shapes {
        let (dx, dz) = shape.split_once(':').with_context(|| format!("shape '{shape}' is not dx:dz"))?;
        codes.push(CodeSpec { family, d_x: dx.parse()?, d_z: dz.parse()? });
    }
    if codes.is_empty() {
        bail!("give sizes with -L or shapes with --shapes");
    }
    let grid = SweepGrid {
        codes,
        decoders: args.decoder.specs()?,
        noise: args.p.clone(),
        axis: if args.p_cx { NoiseAxis::CnotInfidelity } else { NoiseAxis::Physical },
        etas: args.eta.clone(),
        rounds: args.rounds,
        spam: args.spam.into(),
        shots: args.shots,
        base_seed: args.seed,
    };
    let specs = grid.expand()?;
    let total = specs.len();
    let mut done = 0;
    let points = run_points(&specs, args.checkpoint.as_deref(), |p, cached| {
        done += 1;
        eprintln!(
            "[{done}/{total}] {} {} p_cx={:.5} eta={} failures={}/{}{}",
            p.spec.code,
            p.spec.decoder.kind,
            p.p_cx,
            p.spec.eta,
            p.failures,
            p.spec.shots,
            if cached { " (checkpoint)" } else { "" }
        );
    })?;
    emit(args.out.out.as_deref(), &points_output(&points, args.out.format)?)
}

fn decode(exp: &ExperimentArgs, decoder: &DecoderArgs, input: &Path, out: &OutArgs) -> Result<()> {
    let (_, _, circuit) = exp.circuit()?;
    let dem = build_dem(&circuit)?.decompose_hyperedges()?;
    let dec = Decoder::new(&dem, decoder.spec()?.config())?;
    let data = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let (nd, no) = (circuit.num_detectors(), circuit.num_observables());
    let stride = (nd + no).div_ceil(8);
    if stride == 0 || data.len() % stride != 0 {
        bail!("{} is not a b8 file for {nd} detectors and {no} observables", input.display());
    }
    let batch = ShotBatch::read_b8(&data, data.len() / stride, nd, no)?;
    let mut rows = Vec::with_capacity(batch.shots);
    let mut failures = 0;
    for s in 0..batch.shots {
        let predicted = dec.decode(batch.syndrome(s))?.observables;
        let actual = batch.observables(s).iter_ones().fold(0u64, |m, i| m | 1 << i);
        failures += u64::from(predicted != actual);
        rows.push((predicted, actual));
    }
    let text = match out.format {
        Format::Json => json(&serde_json::json!({
            "shots": batch.shots,
            "failures": failures,
            "rate": failures as f64 / batch.shots.max(1) as f64,
            "predictions": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        }))?,
        Format::Csv => csv_table(&["shot", "predicted", "actual"], rows.iter().enumerate().map(|(i, r)| vec![i.to_string(), r.0.to_string(), r.1.to_string()])),
    };
    emit(out.out.as_deref(), &text)
}

fn overhead(model: OverheadArg, p_cx: &[f64], eta: f64, target: f64, coefficients: Option<&[f64]>, out: &OutArgs) -> Result<()> {
    let pair = |c: &[f64], i: usize| Coefficients { a: c[i], b: c[i + 1] };
    let model = match (model, coefficients) {
        (OverheadArg::Xy, None) => OverheadModel::Xy { fit: XY_REFERENCE },
        (OverheadArg::Xy, Some(c)) if c.len() == 2 => OverheadModel::Xy { fit: pair(c, 0) },
        (OverheadArg::SquareCss, None) => OverheadModel::SquareCss { x: CSS_X_REFERENCE, z: CSS_Z_REFERENCE },
        (OverheadArg::SquareCss, Some(c)) if c.len() == 4 => OverheadModel::SquareCss { x: pair(c, 0), z: pair(c, 2) },
        (OverheadArg::RectCss, None) => OverheadModel::RectCss { x: CSS_X_REFERENCE, z: CSS_Z_REFERENCE },
        (OverheadArg::RectCss, Some(c)) if c.len() == 4 => OverheadModel::RectCss { x: pair(c, 0), z: pair(c, 2) },
        _ => bail!("--coefficients takes a,b for xy and ax,bx,az,bz for the CSS models"),
    };
    let mut results = Vec::new();
    for &pc in p_cx {
        let o = solve_overhead(&model, physical_from_cnot(pc, eta), target)?;
        results.push((pc, o));
    }
    let text = match out.format {
        Format::Json => json(&results.iter().map(|(pc, o)| serde_json::json!({ "p_cx": pc, "overhead": o })).collect::<Vec<_>>())?,
        Format::Csv => csv_table(
            &["p_cx", "d_x", "d_z", "rounds", "qubits", "p_log", "d_x_continuous", "d_z_continuous", "qubits_continuous"],
            results.iter().map(|(pc, o)| {
                vec![
                    pc.to_string(),
                    o.d_x.to_string(),
                    o.d_z.to_string(),
                    o.rounds.to_string(),
                    o.qubits.to_string(),
                    o.p_log.to_string(),
                    o.continuous.d_x.to_string(),
                    o.continuous.d_z.to_string(),
                    o.continuous.qubits.to_string(),
                ]
            }),
        ),
    };
    emit(out.out.as_deref(), &text)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::BuildCode { code, out } => {
            let layout = code.spec()?.layout()?;
            let text = match out.format {
                Format::Json => layout.to_json() + "\n",
                Format::Csv => csv_table(
                    &["stabilizer", "ancilla", "x", "y", "kind", "boundary", "support"],
                    layout.stabilizers.iter().enumerate().map(|(i, s)| {
                        let support: Vec<String> = s.support.iter().map(|q| format!("{}{:?}@{}", q.data, q.pauli, q.slot)).collect();
                        vec![
                            i.to_string(),
                            s.ancilla.to_string(),
                            s.coord.0.to_string(),
                            s.coord.1.to_string(),
                            format!("{:?}", s.kind),
                            s.boundary.to_string(),
                            support.join(" "),
                        ]
                    }),
                ),
            };
            emit(out.out.as_deref(), &text)
        }
        Command::Dem { exp, circuit: print_circuit, decompose, out } => {
            let (_, _, circuit) = exp.circuit()?;
            let text = if print_circuit {
                circuit.to_text()
            } else {
                let dem = build_dem(&circuit)?;
                if decompose { dem.decompose_hyperedges()?.to_text() } else { dem.to_text() }
            };
            emit(out.as_deref(), &text)
        }
        Command::Sample { exp, shots, seed, shot_format, out } => {
            let (_, _, circuit) = exp.circuit()?;
            let batch = sample(&circuit, shots, seed);
            let mut buf = Vec::new();
            match shot_format {
                ShotFormat::B8 => batch.write_b8(&mut buf)?,
                ShotFormat::Csv => batch.write_csv(&mut buf)?,
            }
            match out {
                Some(path) => fs::write(&path, buf).with_context(|| format!("writing {}", path.display())),
                None => Ok(io::stdout().write_all(&buf)?),
            }
        }
        Command::Decode { exp, decoder, input, out } => decode(&exp, &decoder, &input, &out),
        Command::Sweep(args) => sweep(&args),
        Command::FitThreshold { select, out } => {
            let points = read_points(&select)?;
            let fit = fit_threshold(&points)?;
            let text = match out.format {
                Format::Json => json(&fit)?,
                Format::Csv => {
                    let mut s = csv_table(
                        &["p_th", "sigma_pth", "nu", "a", "b", "c", "chi2_dof"],
                        [vec![fit.p_th, fit.sigma_pth, fit.nu, fit.a, fit.b, fit.c, fit.chi2_dof].iter().map(f64::to_string).collect()],
                    );
                    // Collapse-plot columns: rescaled x and observed rate per point.
                    s.push('\n');
                    s.push_str(&csv_table(
                        &["size", "p_cx", "x", "rate"],
                        points.iter().map(ThresholdDatum::from_point).map(|d| {
                            let x = (d.p - fit.p_th) * (d.size as f64).powf(1.0 / fit.nu);
                            vec![d.size.to_string(), d.p.to_string(), x.to_string(), d.rate.to_string()]
                        }),
                    ));
                    s
                }
            };
            emit(out.out.as_deref(), &text)
        }
        Command::FitAnsatz { select, family, out } => {
            let points = read_points(&select)?;
            let text = match family {
                FamilyArg::Exponent => {
                    let data: Vec<AnsatzDatum> = points.iter().map(AnsatzDatum::from_point).collect();
                    let fit = fit_exponent_scaling(&data)?;
                    match out.format {
                        Format::Json => json(&fit)?,
                        Format::Csv => csv_table(&["beta", "beta_err", "chi2_dof"], [vec![fit.beta.to_string(), fit.beta_err.to_string(), fit.chi2_dof.to_string()]]),
                    }
                }
                f => {
                    let family = match f {
                        FamilyArg::Xy => AnsatzFamily::Xy,
                        FamilyArg::RectX => AnsatzFamily::RectX,
                        _ => AnsatzFamily::RectZ,
                    };
                    let fit = fit_ansatz(&points, family)?;
                    match out.format {
                        Format::Json => json(&fit)?,
                        Format::Csv => csv_table(
                            &["a", "a_err", "b", "b_err", "chi2_dof"],
                            [[fit.a, fit.a_err, fit.b, fit.b_err, fit.chi2_dof].iter().map(f64::to_string).collect()],
                        ),
                    }
                }
            };
            emit(out.out.as_deref(), &text)
        }
        Command::Overhead { model, p_cx, eta, target, coefficients, out } => overhead(model, &p_cx, eta, target, coefficients.as_deref(), &out),
        Command::Zdist { l_max, deformed, out } => {
            let ls: Vec<usize> = (3..=l_max).step_by(2).collect();
            let rows = z_distance_scan(&ls, deformed)?;
            let text = match out.format {
                Format::Json => json(&rows)?,
                Format::Csv => csv_table(
                    &["L", "n", "d_z", "ratio", "kernel_dim", "z_stabilizers", "z_logicals"],
                    rows.iter().map(|r| {
                        vec![
                            r.l.to_string(),
                            r.n.to_string(),
                            r.d_z.map_or(String::new(), |d| d.to_string()),
                            r.ratio.map_or(String::new(), |x| x.to_string()),
                            r.kernel_dim.to_string(),
                            r.z_stabilizers.to_string(),
                            r.z_logicals.to_string(),
                        ]
                    }),
                ),
            };
            emit(out.out.as_deref(), &text)
        }
        Command::SpamRatio { exp, decoder, shots, seed, out } => {
            let code = exp.code.spec()?;
            let rounds = exp.rounds.unwrap_or_else(|| code.default_rounds());
            let spec = PointSpec { code, decoder: decoder.spec()?, p: exp.p, eta: exp.eta, rounds, spam: Spam::Noisy, shots, seed };
            let r = spam_ratio(&spec)?;
            let text = match out.format {
                Format::Json => json(&r)?,
                Format::Csv => csv_table(
                    &["code", "p", "eta", "rounds", "shots", "noisy_failures", "perfect_failures", "ratio", "sigma"],
                    [vec![
                        code.to_string(),
                        exp.p.to_string(),
                        exp.eta.to_string(),
                        rounds.to_string(),
                        shots.to_string(),
                        r.noisy.failures.to_string(),
                        r.perfect.failures.to_string(),
                        r.ratio.to_string(),
                        r.sigma.to_string(),
                    ]],
                ),
            };
            emit(out.out.as_deref(), &text)
        }
    }
}
