use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polarcoset::minweight::coset_codewords;
use polarcoset::sim::format_sig;
use polarcoset::{
    coset_report, dega_profile, emit_csv, error_coefficient, improve_profile_with,
    pac_min_weight_count, run_bler, JRule, MinWeightReport, Precoder, ProfileFile, RateProfile,
    SimConfig, DEFAULT_BUDGET,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "polarcoset",
    version,
    about = "Minimum-weight analysis and design of polar and PAC codes"
)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on enumerated subsets or search nodes per coset.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a base profile from the DEGA reliability order.
    Construct {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        design_snr_db: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum distance, error coefficient and per-coset counts.
    Enumerate(ProfileArgs),
    /// List explicit minimum-weight codewords of one coset.
    Mwcw {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        coset: usize,
        #[arg(long, default_value_t = 16)]
        limit: usize,
    },
    /// Swap rows to lower the error coefficient.
    Improve {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 1)]
        pi: usize,
        #[arg(long, value_enum, default_value_t = Rule::MaxCover)]
        j_rule: Rule,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum-weight codeword count under convolutional precoding.
    PacCount {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Precoder taps, e.g. 1011011.
        #[arg(long, default_value = "1011011")]
        precoder: Precoder,
    },
    /// Monte-Carlo BLER over BPSK/AWGN.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_frames: Option<u64>,
        #[arg(long)]
        min_errors: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    MaxCover,
    LargestIndex,
}

impl From<Rule> for JRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::MaxCover => JRule::MaxCover,
            Rule::LargestIndex => JRule::LargestIndex,
        }
    }
}

#[derive(Args)]
struct ProfileArgs {
    /// Profile JSON file.
    #[arg(long, conflicts_with_all = ["n", "k"])]
    profile: Option<PathBuf>,
    #[arg(long, requires = "k")]
    n: Option<u32>,
    #[arg(long, requires = "n")]
    k: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    design_snr_db: f64,
}

impl ProfileArgs {
    fn load(&self) -> Result<(RateProfile, Option<f64>)> {
        match (&self.profile, self.n, self.k) {
            (Some(path), _, _) => {
                let file = ProfileFile::load(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok((file.profile()?, file.design_snr_db))
            }
            (None, Some(n), Some(k)) => Ok((
                dega_profile(n, k, self.design_snr_db)?,
                Some(self.design_snr_db),
            )),
            _ => bail!("give either --profile or --n and --k"),
        }
    }
}

/// Closed form when the partial order property holds, coset enumeration otherwise.
fn report(profile: &RateProfile, budget: u64) -> Result<MinWeightReport> {
    if profile.pop_violation().is_none() {
        Ok(error_coefficient(profile)?)
    } else {
        Ok(coset_report(profile, budget)?)
    }
}

fn print_report(out: &mut impl Write, r: &MinWeightReport) -> io::Result<()> {
    writeln!(out, "d_min: {}", r.d_min)?;
    writeln!(out, "A_dmin: {}", r.a_dmin)?;
    writeln!(out, "coset\tcount")?;
    for (i, c) in &r.per_coset {
        writeln!(out, "{i}\t{c}")?;
    }
    Ok(())
}

fn write_json(out: &mut impl Write, v: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Construct {
            n,
            k,
            design_snr_db,
            out: path,
        } => {
            let profile = dega_profile(n, k, design_snr_db)?;
            let file = ProfileFile::new(&profile, Some(design_snr_db));
            if let Some(p) = &path {
                file.save(p)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            let summary = if profile.is_empty() {
                None
            } else {
                Some(report(&profile, cli.budget)?)
            };
            if cli.json {
                write_json(&mut out, &json!({ "profile": file, "report": summary }))?;
            } else {
                writeln!(out, "N: {}  K: {}", profile.len(), profile.dimension())?;
                match &summary {
                    Some(r) => {
                        writeln!(out, "d_min: {}", r.d_min)?;
                        writeln!(out, "A_dmin: {}", r.a_dmin)?;
                    }
                    None => writeln!(out, "d_min: none")?,
                }
                if path.is_none() {
                    writeln!(out, "I: {:?}", profile.indices())?;
                }
            }
        }
        Command::Enumerate(args) => {
            let (profile, _) = args.load()?;
            let r = report(&profile, cli.budget)?;
            if cli.json {
                write_json(&mut out, &serde_json::to_value(&r)?)?;
            } else {
                print_report(&mut out, &r)?;
            }
        }
        Command::Mwcw {
            profile,
            coset,
            limit,
        } => {
            let (profile, _) = profile.load()?;
            let mut words = coset_codewords(coset, &profile, limit.saturating_add(1), cli.budget)?;
            let complete = words.len() <= limit;
            words.truncate(limit);
            if cli.json {
                write_json(
                    &mut out,
                    &json!({ "codewords": words, "complete": complete }),
                )?;
            } else {
                for w in &words {
                    writeln!(
                        out,
                        "leader={} J={:?} M={:?} support={:?}",
                        w.leader, w.j, w.m, w.support
                    )?;
                }
                if complete {
                    writeln!(out, "end of coset: {} codewords", words.len())?;
                } else {
                    writeln!(out, "limit reached: {} codewords shown", words.len())?;
                }
            }
        }
        Command::Improve {
            profile,
            pi,
            j_rule,
            out: path,
        } => {
            let (base, snr) = profile.load()?;
            let (improved, steps) = improve_profile_with(&base, pi, j_rule.into())?;
            let mut current = base.clone();
            let mut trace = vec![report(&base, cli.budget)?.a_dmin];
            for s in &steps {
                current = current.swapped(&[s.removed_j], &[s.added_i])?;
                trace.push(report(&current, cli.budget)?.a_dmin);
            }
            let mut file = ProfileFile::new(&improved, snr);
            file.steps = steps.clone();
            if let Some(p) = &path {
                file.save(p)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if cli.json {
                write_json(&mut out, &json!({ "profile": file, "A_dmin": trace }))?;
            } else {
                writeln!(out, "A_dmin: {}", trace[0])?;
                for (s, a) in steps.iter().zip(&trace[1..]) {
                    writeln!(
                        out,
                        "step {}: remove {} add {} (minus {}, plus {}) -> A_dmin {}",
                        s.iteration, s.removed_j, s.added_i, s.minus, s.plus, a
                    )?;
                }
                if steps.is_empty() {
                    writeln!(out, "no improving swap found")?;
                }
                if path.is_none() {
                    writeln!(out, "I: {:?}", improved.indices())?;
                }
            }
        }
        Command::PacCount { profile, precoder } => {
            let (profile, _) = profile.load()?;
            let r = pac_min_weight_count(&profile, &precoder, cli.budget)?;
            if cli.json {
                let mut v = serde_json::to_value(&r)?;
                v["precoder"] = json!(precoder.to_string());
                write_json(&mut out, &v)?;
            } else {
                writeln!(out, "precoder: {precoder}")?;
                print_report(&mut out, &r)?;
            }
        }
        Command::Simulate {
            config,
            out: path,
            max_frames,
            min_errors,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: SimConfig =
                serde_json::from_str(&text).context("parsing simulation config")?;
            if let Some(m) = max_frames {
                cfg.max_frames = m;
            }
            if let Some(m) = min_errors {
                cfg.min_errors = m;
            }
            if let Some(s) = seed {
                cfg.rng_seed = s;
            }
            let result = run_bler(&cfg)?;
            if result.non_monotone {
                eprintln!("warning: BLER is not monotone in Eb/N0 on this sample path");
            }
            match &path {
                Some(p) => {
                    let f = File::create(p).with_context(|| format!("writing {}", p.display()))?;
                    let mut w = BufWriter::new(f);
                    emit_csv(&result, &mut w)?;
                    w.flush()?;
                }
                None if !cli.json => emit_csv(&result, &mut out)?,
                None => {}
            }
            if cli.json {
                write_json(&mut out, &serde_json::to_value(&result)?)?;
            } else if path.is_some() {
                for p in &result.points {
                    writeln!(
                        out,
                        "{} dB: {} errors / {} frames, BLER {}",
                        p.ebno_db,
                        p.frame_errors,
                        p.frames,
                        format_sig(p.bler, 6)
                    )?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
