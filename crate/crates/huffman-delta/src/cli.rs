//! Command-line front end for the `huffman` binary.
//!
//! Every run writes its outputs and a `<command>.provenance.json` record into the
//! output directory (`--out-dir`, else `HUFFMAN_OUT_DIR`, else `huffman-out`).
//! Exit codes: 1 usage, 2 I/O or parse, 3 domain, 4 numerical.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::construct::{catalog, diamond5_solve, diamond7_solve_with, HuffmanSpec, DEFAULT_BOUND};
use crate::continuum::{
    discretize_and_tweak, synthesize_probe, verify_delta_correlation, Objective, PhaseTerm, ProbeSpec,
};
use crate::error::{Error, Result};
use crate::imaging::{
    self, deblur_with, ghost_image, min_pedestal, multiplex_noise_study, pedestal_pair, random_baseline, random_image,
    watermark_embed, watermark_locate, DeblurOptions, KappaMode, RunConfig,
};
use crate::lattice::io::{self, PgmMapping};
use crate::lattice::{correlate, Tensor};
use crate::metrics::{classify, cross_metrics, QualityReport};
use crate::project::{
    default_directions, project, project3, spectrally_equivalent_family, twin, write_family, ProjectionDirection,
};

pub const OUT_DIR_ENV: &str = "HUFFMAN_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "huffman",
    version,
    about = "Delta-correlated Huffman arrays and diffuse imaging"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "huffman-out")]
    pub out_dir: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an array from a recipe.
    Generate(GenerateArgs),
    /// Quality metrics of an array.
    Analyze(AnalyzeArgs),
    /// Discrete projection of a 2D or 3D array, or a family of projections.
    Project(ProjectArgs),
    /// Alternating-sign twin and its cross-correlation metrics.
    Twin(InputArgs),
    /// Synthesise a continuum probe from an odd phase.
    Probe(ProbeArgs),
    /// Quantise a real array and tweak it toward a better metric.
    Discretize(DiscretizeArgs),
    /// Blur an object by full cross-correlation with a mask.
    Encode(PairArgs),
    /// First estimate of the object: correlate with the mask and crop.
    Decode(PairArgs),
    /// Iterative alias removal.
    Deblur(DeblurArgs),
    /// Two-shot pedestal scheme.
    Pedestal(PedestalArgs),
    /// Scanned-mask ghost imaging.
    Ghost(GhostArgs),
    /// Embed and locate a mark.
    Watermark(WatermarkArgs),
    /// Metrics of random integer arrangements.
    Baseline(BaselineArgs),
    /// Raster versus diffuse acquisition under equal white noise.
    NoiseStudy(NoiseArgs),
    /// Regenerate the 5x5 or 7x7 alphabet tables.
    Tables(TablesArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Full recipe, e.g. "family=catalog key=H9"; overrides the flags below.
    #[arg(long)]
    pub spec: Option<String>,
    /// fibonacci, h5_family, catalog, even_length, diamond5 or diamond7.
    #[arg(long)]
    pub family: Option<String>,
    /// Sequence length, 4n+3.
    #[arg(long = "N")]
    pub len: Option<usize>,
    /// Even up-scaling: 2 Fibonacci, 4 Pell.
    #[arg(long)]
    pub b: Option<i64>,
    /// h5_family parameter.
    #[arg(long)]
    pub n: Option<i64>,
    /// h5_family odd variant.
    #[arg(long)]
    pub odd: Option<bool>,
    /// Catalog key, e.g. H9.
    #[arg(long)]
    pub key: Option<String>,
    /// Comma-separated 5x5 alphabet.
    #[arg(long, allow_hyphen_values = true)]
    pub alphabet: Option<String>,
    /// 7x7 edge value e (d = 1).
    #[arg(long)]
    pub e: Option<i64>,
    /// 7x7 value f.
    #[arg(long)]
    pub f: Option<i64>,
    /// 7x7 value g; derived from f when omitted.
    #[arg(long)]
    pub g: Option<i64>,
    /// 7x7 value h; derived from f when omitted.
    #[arg(long)]
    pub h: Option<i64>,
    /// Rank of an outer product of the 1D recipe given by the other flags.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Output file stem.
    #[arg(long, default_value = "array")]
    pub name: String,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Tensor text file, PGM image, recipe ("family=..."), or catalog key.
    pub input: String,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Tensor file, PGM image, recipe, or catalog key.
    pub input: String,
    /// Print a CSV header and row instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Tensor file, PGM image, recipe, or catalog key.
    pub input: String,
    /// Direction `p:q` (2D) or `p:q:r` (3D).
    #[arg(long, allow_hyphen_values = true)]
    pub dir: Option<String>,
    /// Project the outer square of a 1D seed along every direction with `|p|+|q| <= n`.
    #[arg(long)]
    pub family: Option<i64>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// Samples per axis; give twice for 2D (rows then columns).
    #[arg(long, num_args = 1..=2, default_values_t = vec![1024usize])]
    pub samples: Vec<usize>,
    /// Spatial step per axis; one value is shared by both axes.
    #[arg(long, num_args = 1..=2, default_values_t = vec![0.25f64])]
    pub step: Vec<f64>,
    /// Phase term `m,n,coef` for `coef k_x^m k_y^n`; repeatable. Default `3,0,0.3333333333333333`.
    #[arg(long = "term", allow_hyphen_values = true)]
    pub terms: Vec<String>,
    /// Constant added to every sample.
    #[arg(long, default_value_t = 0.0)]
    pub pedestal: f64,
    /// JSON probe spec; overrides the flags above.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DiscretizeArgs {
    /// Real array to quantise; omitted means a sampled Airy probe.
    pub input: Option<String>,
    /// Grey-level bits of the quantised array.
    #[arg(long, default_value_t = 7)]
    pub bits: u32,
    /// Metric the tweak maximises: m or r.
    #[arg(long, default_value = "m")]
    pub objective: Objective,
    /// Most unit changes to apply.
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    /// Samples of the default Airy probe.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Cubic phase coefficient of the default Airy probe.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// Object (encode) or blurred image (decode).
    pub input: String,
    /// Mask: file, recipe, or catalog key.
    pub mask: String,
    /// Also write an 8-bit PGM of the result.
    #[arg(long)]
    pub pgm: bool,
}

#[derive(Args, Debug)]
pub struct DeblurArgs {
    /// Blurred image from encode.
    pub blurred: String,
    /// Mask used to blur.
    pub mask: String,
    /// Iterations, counting the plain decode as the first.
    #[arg(long, default_value_t = 2)]
    pub iterations: usize,
    /// Stop once a step changes no element by more than this.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    /// Round the estimate to integers.
    #[arg(long)]
    pub snap: bool,
    /// Original object, for error statistics.
    #[arg(long)]
    pub reference: Option<String>,
    /// Also write an 8-bit PGM of the estimate.
    #[arg(long)]
    pub pgm: bool,
}

#[derive(Args, Debug)]
pub struct PedestalArgs {
    /// Object to image.
    pub object: String,
    /// Signed mask.
    pub mask: String,
    /// Defaults to the smallest admissible pedestal.
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GhostArgs {
    /// Object file; omitted means a seeded random phantom.
    #[arg(long)]
    pub object: Option<String>,
    /// Signed mask; a pedestal makes it physical.
    pub mask: String,
    /// Flat key=value file supplying any of: kappa, mode, size, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pedestal; defaults to the smallest admissible value.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// How the pedestal offset is removed: exact or boundary.
    #[arg(long)]
    pub mode: Option<KappaMode>,
    /// Extent of the square random phantom.
    #[arg(long)]
    pub size: Option<usize>,
    /// Seed of the random phantom.
    #[arg(long)]
    pub seed: Option<u64>,
    /// First scanned bucket index per axis.
    #[arg(long, value_delimiter = ',')]
    pub scan_from: Option<Vec<usize>>,
    /// Last scanned bucket index per axis.
    #[arg(long, value_delimiter = ',')]
    pub scan_to: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct WatermarkArgs {
    /// Mark to embed.
    pub mark: String,
    /// Host image; omitted means seeded random hosts.
    #[arg(long)]
    pub host: Option<String>,
    /// Mark centre relative to the host centre, `row,col`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![5isize, 5])]
    pub offset: Vec<isize>,
    /// Random hosts to test, marked and unmarked.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Extent of the square random hosts.
    #[arg(long, default_value_t = 31)]
    pub size: usize,
    /// Seed of the random hosts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    /// Flat key=value file supplying any of: shape, lo, hi, trials, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Array shape, comma-separated [default: 5,5]
    #[arg(long, value_delimiter = ',')]
    pub shape: Option<Vec<usize>>,
    /// Smallest value in the pool [default: -12]
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<i64>,
    /// Largest value in the pool [default: 13]
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<i64>,
    /// Random arrangements [default: 10000]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    /// Diffuse mask; the raster reference is a delta.
    pub mask: String,
    /// Object file; omitted means a seeded random image.
    #[arg(long)]
    pub object: Option<String>,
    /// Flat key=value file supplying any of: sigma, trials, size, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Noise standard deviation per measurement [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Noise realisations [default: 500]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Extent of the square random object [default: 31]
    #[arg(long)]
    pub size: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    /// 1 for the 5x5 alphabets, 2 for the 7x7 alphabets.
    #[arg(long)]
    pub table: u8,
    /// 7x7: edge alphabet value `e` (with `d = 1`).
    #[arg(long, default_value_t = 3)]
    pub e: i64,
    /// 7x7: smallest `f`.
    #[arg(long, default_value_t = 3)]
    pub f_min: i64,
    /// 7x7: largest `f`.
    #[arg(long, default_value_t = 20)]
    pub f_max: i64,
    /// 5x5: fixed leading alphabet `a,b,c`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0i64, 1, 4])]
    pub abc: Vec<i64>,
    /// 5x5: fixed fourth value; defaults to `2c`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<i64>,
    /// Search bound for the free alphabet values.
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub bound: i64,
}

/// Outputs and parameters of one run, written as the provenance record.
struct Run {
    command: &'static str,
    out_dir: PathBuf,
    outputs: Vec<String>,
    seed: Option<u64>,
    parameters: serde_json::Map<String, Value>,
}

impl Run {
    fn new(command: &'static str, out_dir: &Path) -> Result<Run> {
        fs::create_dir_all(out_dir)?;
        Ok(Run {
            command,
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
            seed: None,
            parameters: serde_json::Map::new(),
        })
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out_dir.join(name)
    }

    fn tensor(&mut self, name: &str, t: &Tensor) -> Result<()> {
        let path = self.path(&format!("{name}.txt"));
        io::write_text(&path, t)
    }

    fn pgm(&mut self, name: &str, t: &Tensor, maxval: u16) -> Result<()> {
        let path = self.path(&format!("{name}.pgm"));
        io::write_pgm(&path, t, maxval, PgmMapping::Stretch)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.path(&format!("{name}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(path, body)?;
        Ok(())
    }

    fn finish(self, args: &[String]) -> Result<()> {
        let record = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "args": args,
            "seed": self.seed,
            "parameters": self.parameters,
            "outputs": self.outputs,
        });
        let text = serde_json::to_string_pretty(&record).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(
            self.out_dir.join(format!("{}.provenance.json", self.command)),
            text + "\n",
        )?;
        Ok(())
    }
}

/// A tensor file, PGM image, recipe, or catalog key.
pub fn load_tensor(arg: &str) -> Result<Tensor> {
    let path = Path::new(arg);
    if path.is_file() {
        let pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        return if pgm { io::read_pgm(path) } else { io::read_text(path) };
    }
    if arg.contains('=') {
        return arg.parse::<HuffmanSpec>()?.generate();
    }
    catalog(arg).map_err(|_| {
        Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{arg}: no such file, recipe or catalog key"),
        ))
    })
}

fn report_json(r: &QualityReport) -> Value {
    serde_json::to_value(r).unwrap_or(Value::Null)
}

/// Stdout writes ignore a closed pipe so `huffman ... | head` exits quietly.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).unwrap_or_default() + "\n"));
}

fn generate_spec(a: &GenerateArgs) -> Result<HuffmanSpec> {
    if let Some(s) = &a.spec {
        return s.parse();
    }
    let family = a
        .family
        .as_deref()
        .ok_or_else(|| Error::InvalidSpec("give --family or --spec".into()))?;
    let mut tokens = Vec::new();
    if let Some(rank) = a.rank {
        tokens.push(format!("family=outer_product rank={rank} seed={family}"));
    } else {
        tokens.push(format!("family={family}"));
    }
    let pairs: [(&str, Option<String>); 10] = [
        ("N", a.len.map(|v| v.to_string())),
        ("b", a.b.map(|v| v.to_string())),
        ("n", a.n.map(|v| v.to_string())),
        ("odd", a.odd.map(|v| v.to_string())),
        ("key", a.key.clone()),
        ("alphabet", a.alphabet.clone()),
        ("e", a.e.map(|v| v.to_string())),
        ("f", a.f.map(|v| v.to_string())),
        ("g", a.g.map(|v| v.to_string())),
        ("h", a.h.map(|v| v.to_string())),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            tokens.push(format!("{k}={v}"));
        }
    }
    tokens.join(" ").parse()
}

fn cmd_generate(a: &GenerateArgs, run: &mut Run) -> Result<()> {
    let spec = generate_spec(a)?;
    let t = spec.generate()?;
    let report = classify(&t)?;
    run.param("spec", spec.to_string());
    run.tensor(&a.name, &t)?;
    run.json(&format!("{}.report", a.name), &report)?;
    print_json(&json!({ "spec": spec.to_string(), "shape": t.shape(), "report": report_json(&report) }));
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs, run: &mut Run) -> Result<()> {
    let t = load_tensor(&a.input)?;
    let report = classify(&t)?;
    run.param("input", &a.input);
    run.json("report", &report)?;
    if a.csv {
        emit(&format!(
            "{}\n{}\n",
            QualityReport::CSV_HEADER.join(","),
            report.csv_row().join(",")
        ));
    } else {
        print_json(&report_json(&report));
    }
    Ok(())
}

fn cmd_project(a: &ProjectArgs, run: &mut Run) -> Result<()> {
    let t = load_tensor(&a.input)?;
    run.param("input", &a.input);
    if let Some(max_n) = a.family {
        let members = spectrally_equivalent_family(&t, &default_directions(max_n))?;
        let dir = run.path("family");
        write_family(&dir, &members)?;
        run.param("max_n", max_n);
        let rows: Vec<Value> = members
            .iter()
            .map(|m| json!({ "direction": m.direction.to_string(), "length": m.array.len(), "report": report_json(&m.report) }))
            .collect();
        print_json(&Value::Array(rows));
        return Ok(());
    }
    let dir: ProjectionDirection = a
        .dir
        .as_deref()
        .ok_or_else(|| Error::InvalidSpec("give --dir p:q or --family n".into()))?
        .parse()?;
    let out = if dir.r.is_some() {
        project3(&t, dir)?
    } else {
        project(&t, dir)?
    };
    let report = classify(&out)?;
    run.param("direction", dir.to_string());
    run.tensor("projection", &out)?;
    run.json("projection.report", &report)?;
    print_json(&json!({ "direction": dir.to_string(), "shape": out.shape(), "report": report_json(&report) }));
    Ok(())
}

fn cmd_twin(a: &InputArgs, run: &mut Run) -> Result<()> {
    let t = load_tensor(&a.input)?;
    let tw = twin(&t);
    run.param("input", &a.input);
    run.tensor("twin", &tw)?;
    let mut summary = json!({ "twin_report": report_json(&classify(&tw)?) });
    if t.ndim() == 1 {
        let c = cross_metrics(&t, &tw)?;
        summary["cross"] = json!({ "peak": c.peak, "peak_shift": c.peak_shift[0], "R": c.r, "M": c.m });
    }
    run.json("twin.report", &summary)?;
    print_json(&summary);
    Ok(())
}

fn parse_term(s: &str) -> Result<PhaseTerm> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::InvalidSpec(format!("phase term {s:?} is not m,n,coef"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(PhaseTerm {
        m: parts[0].parse().map_err(|_| bad())?,
        n: parts[1].parse().map_err(|_| bad())?,
        coef: parts[2].parse().map_err(|_| bad())?,
    })
}

fn probe_spec(a: &ProbeArgs) -> Result<ProbeSpec> {
    if let Some(path) = &a.spec {
        let text = fs::read_to_string(path)?;
        return serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()));
    }
    let terms = if a.terms.is_empty() {
        vec![PhaseTerm {
            m: 3,
            n: 0,
            coef: 1.0 / 3.0,
        }]
    } else {
        a.terms.iter().map(|s| parse_term(s)).collect::<Result<_>>()?
    };
    let step = if a.step.len() == 1 {
        vec![a.step[0]; a.samples.len()]
    } else {
        a.step.clone()
    };
    Ok(ProbeSpec {
        samples: a.samples.clone(),
        step,
        terms,
        pedestal: a.pedestal,
    })
}

fn cmd_probe(a: &ProbeArgs, run: &mut Run) -> Result<()> {
    let spec = probe_spec(a)?;
    let probe = synthesize_probe(&spec)?;
    let delta = verify_delta_correlation(&probe)?;
    let (lo, hi) = probe.min_max();
    run.param("spec", &spec);
    run.tensor("probe", &probe)?;
    if probe.ndim() == 2 {
        run.pgm("probe", &probe, u16::MAX)?;
    }
    run.json("probe.spec", &spec)?;
    let summary = json!({ "min": lo, "max": hi, "min_pedestal": (-lo).max(0.0), "delta": delta });
    run.json("probe.report", &summary)?;
    print_json(&summary);
    Ok(())
}

fn cmd_discretize(a: &DiscretizeArgs, run: &mut Run) -> Result<()> {
    let h = match &a.input {
        Some(p) => load_tensor(p)?,
        None => {
            run.param("samples", a.samples);
            run.param("tau", a.tau);
            synthesize_probe(&ProbeSpec::airy_1d(a.samples, a.tau))?
        }
    };
    let out = discretize_and_tweak(&h, a.bits, a.objective, a.iterations)?;
    run.param("bits", a.bits);
    run.param("objective", a.objective);
    run.param("iterations", a.iterations);
    run.tensor("rounded", &out.rounded)?;
    run.tensor("tweaked", &out.array)?;
    let summary = json!({
        "iterations": out.iterations,
        "undefined": out.undefined,
        "initial": out.initial.as_ref().map(report_json),
        "report": out.report.as_ref().map(report_json),
    });
    run.json("tweaked.report", &summary)?;
    let mut hist = String::from("iteration,M,R\n");
    for (k, (m, r)) in out.history.iter().enumerate() {
        hist.push_str(&format!("{k},{m},{r}\n"));
    }
    run.text("history.csv", &hist)?;
    print_json(&summary);
    Ok(())
}

fn cmd_encode(a: &PairArgs, run: &mut Run) -> Result<()> {
    let (o, h) = (load_tensor(&a.input)?, load_tensor(&a.mask)?);
    let blurred = imaging::encode(&o, &h)?;
    run.param("object", &a.input);
    run.param("mask", &a.mask);
    run.tensor("blurred", &blurred)?;
    if a.pgm {
        run.pgm("blurred", &blurred, 255)?;
    }
    print_json(&json!({ "shape": blurred.shape() }));
    Ok(())
}

fn cmd_decode(a: &PairArgs, run: &mut Run) -> Result<()> {
    let (i, h) = (load_tensor(&a.input)?, load_tensor(&a.mask)?);
    let c0 = h.sum_squares()?.to_f64();
    let decoded = imaging::decode(&i, &h)?;
    let estimate = decoded.scale(1.0 / c0);
    run.param("blurred", &a.input);
    run.param("mask", &a.mask);
    run.tensor("decoded", &decoded)?;
    run.tensor("estimate", &estimate)?;
    if a.pgm {
        run.pgm("estimate", &estimate, 255)?;
    }
    print_json(&json!({ "shape": decoded.shape(), "C0": c0 }));
    Ok(())
}

fn cmd_deblur(a: &DeblurArgs, run: &mut Run) -> Result<()> {
    let (i, h) = (load_tensor(&a.blurred)?, load_tensor(&a.mask)?);
    let options = DeblurOptions {
        tolerance: a.tolerance,
        snap: a.snap,
    };
    let out = deblur_with(&i, &h, a.iterations, options)?;
    run.param("blurred", &a.blurred);
    run.param("mask", &a.mask);
    run.param("iterations", a.iterations);
    run.param("tolerance", a.tolerance);
    run.param("snap", a.snap);
    run.tensor("deblurred", &out.estimate)?;
    if a.pgm {
        run.pgm("deblurred", &out.estimate, 255)?;
    }
    let mut summary = json!({ "iterations": out.iterations, "steps": out.steps, "diverged": out.diverged });
    if let Some(r) = &a.reference {
        let o = load_tensor(r)?;
        summary["max_error"] = json!(imaging::max_abs_error(&out.estimate, &o)?);
        summary["mean_error"] = json!(imaging::mean_abs_error(&out.estimate, &o)?);
    }
    run.json("deblur.report", &summary)?;
    print_json(&summary);
    if out.diverged {
        return Err(Error::Numerical("deblur diverged".into()));
    }
    Ok(())
}

fn cmd_pedestal(a: &PedestalArgs, run: &mut Run) -> Result<()> {
    let (o, h) = (load_tensor(&a.object)?, load_tensor(&a.mask)?);
    let kappa = a.kappa.unwrap_or_else(|| min_pedestal(&h));
    let pair = pedestal_pair(&o, &h, kappa)?;
    run.param("object", &a.object);
    run.param("mask", &a.mask);
    run.param("kappa", kappa);
    run.tensor("plus", &pair.plus)?;
    run.tensor("minus", &pair.minus)?;
    run.tensor("combined", &pair.combined)?;
    let exact = pair.combined
        == imaging::encode(&o, &h)?
            .scale_int(2)
            .unwrap_or_else(|_| pair.combined.clone());
    let summary = json!({ "kappa": kappa, "combined_is_twice_encode": exact });
    print_json(&summary);
    Ok(())
}

fn config(path: &Option<PathBuf>) -> Result<RunConfig> {
    path.as_deref().map_or(Ok(RunConfig::default()), RunConfig::read)
}

fn cmd_ghost(a: &GhostArgs, run: &mut Run) -> Result<()> {
    let cfg = config(&a.config)?;
    let h = load_tensor(&a.mask)?;
    let seed = a.seed.map_or_else(|| cfg.get("seed", 0u64), Ok)?;
    let size = a.size.map_or_else(|| cfg.get("size", 31usize), Ok)?;
    let kappa = a.kappa.map_or_else(|| cfg.get("kappa", min_pedestal(&h)), Ok)?;
    let mode = a.mode.map_or_else(|| cfg.get("mode", KappaMode::Boundary), Ok)?;
    let o = match &a.object {
        Some(p) => load_tensor(p)?,
        None => {
            run.seed = Some(seed);
            run.param("size", size);
            phantom(size, h.shape(), seed)?
        }
    };
    let scan = match (&a.scan_from, &a.scan_to) {
        (Some(f), Some(t)) => Some((f.as_slice(), t.as_slice())),
        (None, None) => None,
        _ => return Err(Error::InvalidSpec("give both --scan-from and --scan-to".into())),
    };
    let out = ghost_image(&o, &h, kappa, scan, mode)?;
    run.param("mask", &a.mask);
    run.param("kappa", kappa);
    run.param("mode", mode);
    run.tensor("object", &o)?;
    run.tensor("bucket", &out.bucket)?;
    run.tensor("reconstruction", &out.reconstruction)?;
    let summary = json!({
        "kappa_prime": out.kappa_prime,
        "mode": out.mode,
        "partial": out.partial,
        "max_error": imaging::max_abs_error(&out.reconstruction, &o)?,
        "mean_error": imaging::mean_abs_error(&out.reconstruction, &o)?,
    });
    run.json("ghost.report", &summary)?;
    print_json(&summary);
    Ok(())
}

/// Random values in `0..=31` inside a zero border as wide as the mask.
fn phantom(size: usize, mask: &[usize], seed: u64) -> Result<Tensor> {
    let border = mask.iter().copied().max().unwrap_or(1) / 2;
    if size <= 2 * border {
        return Err(Error::InvalidSpec(format!("phantom size {size} leaves no interior")));
    }
    let inner = size - 2 * border;
    let dims = mask.len();
    let block = random_image(&vec![inner; dims], 0, 31, seed)?;
    Tensor::zeros_int(&vec![size; dims])?.paste(&block, &vec![border; dims])
}

fn cmd_watermark(a: &WatermarkArgs, run: &mut Run) -> Result<()> {
    let mark = load_tensor(&a.mark)?;
    run.param("mark", &a.mark);
    run.param("offset", &a.offset);
    if let Some(p) = &a.host {
        let host = load_tensor(p)?;
        let marked = watermark_embed(&host, &mark, &a.offset)?;
        let found = watermark_locate(&marked, &mark)?;
        run.tensor("marked", &marked)?;
        run.json("watermark.report", &found)?;
        print_json(&serde_json::to_value(&found).unwrap_or(Value::Null));
        return Ok(());
    }
    run.seed = Some(a.seed);
    run.param("trials", a.trials);
    run.param("size", a.size);
    let dims = mark.ndim();
    let mut located = 0;
    let mut false_positives = 0;
    let mut rows = String::from("trial,located,offset,peak,unmarked_peak,false_positive\n");
    for t in 0..a.trials {
        let host = random_image(&vec![a.size; dims], 0, 31, crate::rng::splitmix64(a.seed ^ t as u64))?;
        let found = watermark_locate(&watermark_embed(&host, &mark, &a.offset)?, &mark)?;
        let clean = watermark_locate(&host, &mark)?;
        let ok = found.offset == a.offset && found.detected;
        located += ok as usize;
        false_positives += clean.detected as usize;
        let off: Vec<String> = found.offset.iter().map(isize::to_string).collect();
        rows.push_str(&format!(
            "{t},{ok},{},{},{},{}\n",
            off.join(" "),
            found.peak,
            clean.peak,
            clean.detected
        ));
    }
    run.text("watermark.csv", &rows)?;
    let summary = json!({ "trials": a.trials, "located": located, "false_positives": false_positives, "threshold": mark.sum_squares()?.to_f64() / 2.0 });
    run.json("watermark.report", &summary)?;
    print_json(&summary);
    Ok(())
}

fn cmd_baseline(a: &BaselineArgs, run: &mut Run) -> Result<()> {
    let cfg = config(&a.config)?;
    let shape = match &a.shape {
        Some(s) => s.clone(),
        None => match cfg.raw("shape") {
            Some(raw) => raw
                .split(',')
                .map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad shape {raw}"))))
                .collect::<Result<_>>()?,
            None => vec![5, 5],
        },
    };
    let lo = a.lo.map_or_else(|| cfg.get("lo", -12i64), Ok)?;
    let hi = a.hi.map_or_else(|| cfg.get("hi", 13i64), Ok)?;
    let trials = a.trials.map_or_else(|| cfg.get("trials", 10_000usize), Ok)?;
    let seed = a.seed.map_or_else(|| cfg.get("seed", 0u64), Ok)?;
    if lo > hi {
        return Err(Error::InvalidSpec(format!("empty value range {lo}..={hi}")));
    }
    let pool: Vec<i64> = (lo..=hi).collect();
    let stats = random_baseline(&shape, &pool, trials, seed)?;
    run.seed = Some(seed);
    run.param("shape", &shape);
    run.param("lo", lo);
    run.param("hi", hi);
    run.param("trials", trials);
    let mut rows = String::from("trial,R,M\n");
    for (k, (r, m)) in stats.samples.iter().enumerate() {
        rows.push_str(&format!("{k},{r},{m}\n"));
    }
    run.text("baseline.csv", &rows)?;
    run.json("baseline.report", &stats)?;
    print_json(&serde_json::to_value(&stats).unwrap_or(Value::Null));
    Ok(())
}

fn cmd_noise(a: &NoiseArgs, run: &mut Run) -> Result<()> {
    let cfg = config(&a.config)?;
    let h = load_tensor(&a.mask)?;
    let sigma = a.sigma.map_or_else(|| cfg.get("sigma", 1.0f64), Ok)?;
    let trials = a.trials.map_or_else(|| cfg.get("trials", 500usize), Ok)?;
    let size = a.size.map_or_else(|| cfg.get("size", 31usize), Ok)?;
    let seed = a.seed.map_or_else(|| cfg.get("seed", 0u64), Ok)?;
    let o = match &a.object {
        Some(p) => load_tensor(p)?,
        None => random_image(&vec![size; h.ndim()], 0, 31, seed)?,
    };
    let report = multiplex_noise_study(&o, &h, sigma, trials, seed)?;
    run.seed = Some(seed);
    run.param("mask", &a.mask);
    run.param("sigma", sigma);
    run.param("trials", trials);
    run.json("noise.report", &report)?;
    print_json(&serde_json::to_value(&report).unwrap_or(Value::Null));
    Ok(())
}

/// Rows of the 7x7 alphabet table for `d = 1` and the given `e`, largest `f` first.
pub fn table2_rows(e: i64, f_range: (i64, i64), bound: i64) -> Result<Vec<(Vec<i64>, QualityReport)>> {
    let mut rows = Vec::new();
    for sol in diamond7_solve_with(1, e, (f_range.0.max(1), f_range.1), (1, bound), (1, bound))? {
        let t = crate::construct::build_diamond(7, &sol.alphabet)?;
        rows.push((sol.alphabet[5..].to_vec(), classify(&t)?));
    }
    rows.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(rows)
}

/// Smallest and largest correlation on the outer boundary of the shifts where
/// the support overlaps itself.
fn edge_range(t: &Tensor) -> Result<(i128, i128)> {
    let c = correlate(t, t)?;
    let support = Tensor::from_ints(
        t.shape(),
        &(0..t.len()).map(|k| t.is_nonzero(k) as i64).collect::<Vec<_>>(),
    )?;
    let overlap = correlate(&support, &support)?.values;
    let shape = overlap.shape().to_vec();
    let inside = |idx: &[usize], axis: usize, step: isize| -> bool {
        let i = idx[axis] as isize + step;
        if i < 0 || i >= shape[axis] as isize {
            return false;
        }
        let mut n = idx.to_vec();
        n[axis] = i as usize;
        overlap.is_nonzero(overlap.ravel(&n))
    };
    let values: Vec<i128> = (0..overlap.len())
        .filter(|&k| overlap.is_nonzero(k))
        .filter(|&k| {
            let idx = overlap.unravel(k);
            (0..shape.len()).any(|ax| !inside(&idx, ax, 1) || !inside(&idx, ax, -1))
        })
        .filter_map(|k| c.values.value(k).as_int())
        .collect();
    Ok((
        values.iter().copied().min().unwrap_or(0),
        values.iter().copied().max().unwrap_or(0),
    ))
}

fn fmt_metric(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

fn cmd_tables(a: &TablesArgs, run: &mut Run) -> Result<()> {
    let mut body = String::new();
    match a.table {
        1 => {
            let abc: [i64; 3] = a
                .abc
                .clone()
                .try_into()
                .map_err(|_| Error::InvalidSpec("--abc needs three values".into()))?;
            body.push_str("alphabet,R,M,OP,bits,Cedge_min,Cedge_max\n");
            for sol in diamond5_solve(abc, a.x, a.bound)? {
                let t = crate::construct::build_diamond(5, &sol.alphabet)?;
                let r = classify(&t)?;
                let (lo, hi) = edge_range(&t)?;
                let alpha: Vec<String> = sol.alphabet.iter().map(i64::to_string).collect();
                body.push_str(&format!(
                    "{},{},{},{},{},{lo},{hi}\n",
                    alpha.join(" "),
                    fmt_metric(r.r),
                    fmt_metric(r.m),
                    r.op,
                    r.bits
                ));
            }
            run.param("abc", &a.abc);
            run.param("x", a.x);
        }
        2 => {
            body.push_str("f,g,h,R,M,S,bits,OP,Cedge\n");
            for (fgh, r) in table2_rows(a.e, (a.f_min, a.f_max), a.bound)? {
                body.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    fgh[0],
                    fgh[1],
                    fgh[2],
                    fmt_metric(r.r),
                    fmt_metric(r.m),
                    fmt_metric(r.s),
                    r.bits,
                    r.op,
                    r.c_edge
                ));
            }
            run.param("e", a.e);
            run.param("f_range", [a.f_min, a.f_max]);
        }
        other => return Err(Error::InvalidSpec(format!("no table {other}; use 1 or 2"))),
    }
    run.param("table", a.table);
    run.param("bound", a.bound);
    run.text(&format!("table{}.csv", a.table), &body)?;
    emit(&body);
    Ok(())
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Generate(_) => "generate",
        Command::Analyze(_) => "analyze",
        Command::Project(_) => "project",
        Command::Twin(_) => "twin",
        Command::Probe(_) => "probe",
        Command::Discretize(_) => "discretize",
        Command::Encode(_) => "encode",
        Command::Decode(_) => "decode",
        Command::Deblur(_) => "deblur",
        Command::Pedestal(_) => "pedestal",
        Command::Ghost(_) => "ghost",
        Command::Watermark(_) => "watermark",
        Command::Baseline(_) => "baseline",
        Command::NoiseStudy(_) => "noise-study",
        Command::Tables(_) => "tables",
    }
}

/// Execute a parsed command line.
pub fn execute(cli: &Cli, args: &[String]) -> Result<()> {
    if let Some(n) = cli.threads {
        // A pool may already exist when called twice in one process; that only affects speed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut run = Run::new(name(&cli.command), &cli.out_dir)?;
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, &mut run)?,
        Command::Analyze(a) => cmd_analyze(a, &mut run)?,
        Command::Project(a) => cmd_project(a, &mut run)?,
        Command::Twin(a) => cmd_twin(a, &mut run)?,
        Command::Probe(a) => cmd_probe(a, &mut run)?,
        Command::Discretize(a) => cmd_discretize(a, &mut run)?,
        Command::Encode(a) => cmd_encode(a, &mut run)?,
        Command::Decode(a) => cmd_decode(a, &mut run)?,
        Command::Deblur(a) => {
            // Record provenance even when the run diverges.
            let result = cmd_deblur(a, &mut run);
            run.finish(args)?;
            return result;
        }
        Command::Pedestal(a) => cmd_pedestal(a, &mut run)?,
        Command::Ghost(a) => cmd_ghost(a, &mut run)?,
        Command::Watermark(a) => cmd_watermark(a, &mut run)?,
        Command::Baseline(a) => cmd_baseline(a, &mut run)?,
        Command::NoiseStudy(a) => cmd_noise(a, &mut run)?,
        Command::Tables(a) => cmd_tables(a, &mut run)?,
    }
    run.finish(args)
}

/// Parse, run and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let text: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &text) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("huffman: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_flags_build_recipes() {
        let cli =
            Cli::try_parse_from(["huffman", "generate", "--family", "fibonacci", "--N", "15", "--b", "2"]).unwrap();
        let Command::Generate(a) = &cli.command else { panic!() };
        assert_eq!(generate_spec(a).unwrap().to_string(), "family=fibonacci_binet N=15 b=2");
        let cli = Cli::try_parse_from([
            "huffman", "generate", "--family", "catalog", "--key", "H9", "--rank", "2",
        ])
        .unwrap();
        let Command::Generate(a) = &cli.command else { panic!() };
        assert_eq!(generate_spec(a).unwrap().generate().unwrap().shape(), &[9, 9]);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["huffman", "nope"]), 1);
        assert_eq!(main_with_args(["huffman", "generate", "--N", "x"]), 1);
    }

    #[test]
    fn terms_parse() {
        assert_eq!(parse_term("3,0,-0.5").unwrap(), PhaseTerm { m: 3, n: 0, coef: -0.5 });
        assert!(parse_term("3,0").is_err());
    }

    #[test]
    fn loads_catalog_and_recipes() {
        assert_eq!(load_tensor("H9").unwrap().len(), 9);
        assert_eq!(load_tensor("family=fibonacci_binet N=7 b=2").unwrap().len(), 7);
        assert_eq!(load_tensor("/no/such/file").unwrap_err().exit_code(), 2);
    }
}
