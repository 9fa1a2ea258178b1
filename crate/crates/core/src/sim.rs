//! Monte-Carlo frame error rates over BPSK/AWGN with SC-list decoding.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{bpsk, ml_lower_bound_flag, CodeSpec, DecoderConfig, SclDecoder};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "ebno_db,frames,errors,ml_lb_errors,bler,ml_lb_bler,ci_lo,ci_hi";

const WILSON_Z: f64 = 1.959_963_984_540_054;

fn default_min_errors() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: CodeSpec,
    #[serde(default)]
    pub cfg: DecoderConfig,
    pub ebno_points_db: Vec<f64>,
    pub max_frames: u64,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Transmit without noise; the decoder sees saturated LLRs.
    #[serde(default)]
    pub noiseless: bool,
}

impl SimConfig {
    pub fn new(spec: CodeSpec, cfg: DecoderConfig, ebno_points_db: Vec<f64>) -> Self {
        Self {
            spec,
            cfg,
            ebno_points_db,
            max_frames: 100_000,
            min_errors: default_min_errors(),
            rng_seed: 0,
            noiseless: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.max_frames == 0 {
            return Err(Error::InvalidConfig("max_frames must be positive".into()));
        }
        if self.min_errors == 0 {
            return Err(Error::InvalidConfig("min_errors must be positive".into()));
        }
        if self.spec.info_bits() == 0 {
            return Err(Error::InvalidConfig("code carries no data bits".into()));
        }
        if let Some(x) = self.ebno_points_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "Eb/N0 point {x} is not finite"
            )));
        }
        Ok(())
    }

    /// Noise standard deviation at `ebno_db`, rate `K/N` with any CRC counted in `K`.
    pub fn sigma(&self, ebno_db: f64) -> f64 {
        let rate = self.spec.profile.dimension() as f64 / self.spec.len() as f64;
        (1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub ebno_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub ml_lb_errors: u64,
    pub bler: f64,
    pub ml_lb_bler: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub points: Vec<SimPoint>,
    /// Some point has a higher BLER than an earlier, lower-SNR point.
    pub non_monotone: bool,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(errors: u64, frames: u64) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Default)]
struct Outcome {
    error: bool,
    ml_lb: bool,
}

fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(frame);
    rng
}

fn run_frame(
    dec: &mut SclDecoder,
    cfg: &SimConfig,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    let spec = dec.spec();
    let data: Vec<bool> = (0..spec.info_bits()).map(|_| rng.random()).collect();
    let c = spec.encode(&data)?;
    let (y, llr): (Vec<f64>, Vec<f64>) = if cfg.noiseless {
        let y: Vec<f64> = c.iter().map(|&b| bpsk(b)).collect();
        let l = y.iter().map(|&s| s * cfg.cfg.llr_clamp).collect();
        (y, l)
    } else {
        let y: Vec<f64> = c
            .iter()
            .map(|&b| {
                let z: f64 = StandardNormal.sample(rng);
                bpsk(b) + sigma * z
            })
            .collect();
        let scale = 2.0 / (sigma * sigma);
        let l = y.iter().map(|&r| r * scale).collect();
        (y, l)
    };
    let out = dec.decode(&llr)?;
    let error = out.data != data;
    Ok(Outcome {
        error,
        ml_lb: error && ml_lower_bound_flag(&y, &out.codeword, &c),
    })
}

/// Runs every Eb/N0 point. Frames are numbered and each draws from its own
/// stream, so results do not depend on the number of worker threads.
pub fn run_bler(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    SclDecoder::new(config.spec.clone(), config.cfg.clone())?;
    let batch = (rayon::current_num_threads() as u64 * 64).max(256);
    let mut points = Vec::with_capacity(config.ebno_points_db.len());
    for (pi, &ebno) in config.ebno_points_db.iter().enumerate() {
        let sigma = config.sigma(ebno);
        let (mut frames, mut errors, mut ml) = (0u64, 0u64, 0u64);
        'outer: while frames < config.max_frames {
            let end = (frames + batch).min(config.max_frames);
            let outcomes: Vec<Outcome> = (frames..end)
                .into_par_iter()
                .map_init(
                    || SclDecoder::new(config.spec.clone(), config.cfg.clone()),
                    |dec, f| {
                        let dec = dec
                            .as_mut()
                            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                        run_frame(dec, config, sigma, &mut frame_rng(config.rng_seed, pi, f))
                    },
                )
                .collect::<Result<_>>()?;
            for o in outcomes {
                frames += 1;
                errors += o.error as u64;
                ml += o.ml_lb as u64;
                if errors >= config.min_errors {
                    break 'outer;
                }
            }
        }
        let (ci_lo, ci_hi) = wilson_interval(errors, frames);
        points.push(SimPoint {
            ebno_db: ebno,
            frames,
            frame_errors: errors,
            ml_lb_errors: ml,
            bler: errors as f64 / frames as f64,
            ml_lb_bler: ml as f64 / frames as f64,
            ci_lo,
            ci_hi,
        });
    }
    let non_monotone = points.windows(2).any(|w| w[1].bler > w[0].bler);
    Ok(SimResult {
        points,
        non_monotone,
    })
}

/// Fixed-point rendering with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn emit_csv<W: Write>(result: &SimResult, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.ebno_db,
            p.frames,
            p.frame_errors,
            p.ml_lb_errors,
            format_sig(p.bler, 6),
            format_sig(p.ml_lb_bler, 6),
            format_sig(p.ci_lo, 6),
            format_sig(p.ci_hi, 6)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::dega_profile;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.036_995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.0123456789, 6), "0.0123457");
        assert_eq!(format_sig(0.5, 6), "0.500000");
        assert_eq!(format_sig(1.0, 6), "1.00000");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(2.5e-7, 3), "0.000000250");
    }

    fn small_config() -> SimConfig {
        let spec = CodeSpec::polar(dega_profile(4, 8, 2.0).unwrap());
        let mut c = SimConfig::new(spec, DecoderConfig::with_list(4), vec![1.0, 3.0]);
        c.max_frames = 3000;
        c.min_errors = 40;
        c.rng_seed = 11;
        c
    }

    #[test]
    fn stops_exactly_at_min_errors() {
        let r = run_bler(&small_config()).unwrap();
        for p in &r.points {
            assert!(p.frame_errors == 40 || p.frames == 3000);
            assert!(p.ml_lb_errors <= p.frame_errors);
            assert!(p.ci_lo <= p.bler && p.bler <= p.ci_hi);
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let c = small_config();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| run_bler(&c)).unwrap();
        let b = three.install(|| run_bler(&c)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, run_bler(&c).unwrap());
    }

    #[test]
    fn noiseless_has_no_errors() {
        let mut c = small_config();
        c.noiseless = true;
        c.max_frames = 1000;
        let r = run_bler(&c).unwrap();
        assert!(r
            .points
            .iter()
            .all(|p| p.frames == 1000 && p.frame_errors == 0 && p.bler == 0.0));
    }

    #[test]
    fn csv_layout() {
        let r = SimResult {
            points: vec![SimPoint {
                ebno_db: 2.5,
                frames: 1000,
                frame_errors: 10,
                ml_lb_errors: 3,
                bler: 0.01,
                ml_lb_bler: 0.003,
                ci_lo: 0.005,
                ci_hi: 0.02,
            }],
            non_monotone: false,
        };
        let mut buf = Vec::new();
        emit_csv(&r, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "ebno_db,frames,errors,ml_lb_errors,bler,ml_lb_bler,ci_lo,ci_hi\n\
             2.5,1000,10,3,0.0100000,0.00300000,0.00500000,0.0200000\n"
        );
    }

    #[test]
    fn config_json_defaults() {
        let c = small_config();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SimConfig>(&s).unwrap(), c);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let mut obj = v.as_object().unwrap().clone();
        obj.remove("min_errors");
        obj.remove("cfg");
        let back: SimConfig = serde_json::from_value(serde_json::Value::Object(obj)).unwrap();
        assert_eq!(back.min_errors, 100);
        assert_eq!(back.cfg, DecoderConfig::default());
        let mut bad = c.clone();
        bad.max_frames = 0;
        assert!(run_bler(&bad).is_err());
    }
}
