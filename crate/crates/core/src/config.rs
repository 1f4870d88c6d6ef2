//! Simulation configuration: defaults, a flat `key=value` file format, and
//! validation.
//!
//! Keys are the published config names: `T`, `duration`, `tau`, `k`, `kp`,
//! `kd`, `gamma`, `window`, `b_event`, `refractory`, `sigma_floor`, `g`,
//! `segments`, `preset`. `segments` is a semicolon-separated list of
//! `beta,length` pairs, with `inf` allowed as the last length. Unknown keys
//! are rejected by name; `#` starts a comment line.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use crate::error::Error;
use crate::scenario::RampSegment;
use crate::Result;

/// Which response feeds the camera controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Controller fed by the anticipating response.
    Full,
    /// Controller fed directly by the adaptive response, leaving the
    /// perceptual delay uncompensated.
    NoAnticipation,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Full => "full",
            Preset::NoAnticipation => "no-anticipation",
        }
    }

    pub fn flipped(&self) -> Preset {
        match self {
            Preset::Full => Preset::NoAnticipation,
            Preset::NoAnticipation => Preset::Full,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Preset> {
        match s {
            "full" => Ok(Preset::Full),
            "no-anticipation" => Ok(Preset::NoAnticipation),
            other => Err(Error::invalid_config(
                "preset",
                format!("expected `full` or `no-anticipation`, got `{other}`"),
            )),
        }
    }
}

/// Full parameter set of one simulation run.
#[derive(Clone, Debug)]
pub struct SimConfig {
    /// Integration step in seconds (key `T`).
    pub step: f64,
    /// Run length in seconds.
    pub duration: f64,
    /// Perceptual delay in seconds; must be an integer multiple of `T`.
    pub tau: f64,
    /// Anticipating-response feedback gain (key `k`).
    pub feedback_gain: f64,
    pub kp: f64,
    pub kd: f64,
    /// Learning rate of the parameter estimate; zero freezes it.
    pub gamma: f64,
    /// Detection window length in seconds; integer multiple of `T`.
    pub window: f64,
    pub b_event: f64,
    pub refractory: f64,
    pub sigma_floor: f64,
    pub g: f64,
    pub segments: Vec<RampSegment>,
    pub preset: Preset,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step: 0.01,
            duration: 100.0,
            tau: 0.65,
            feedback_gain: 1.0,
            kp: 1.0,
            kd: 2.0,
            gamma: 1.0,
            window: 10.0,
            b_event: 3.0,
            refractory: 2.0,
            sigma_floor: 1e-12,
            g: 9.81,
            segments: vec![
                RampSegment {
                    beta: PI / 12.0,
                    length: 500.0,
                },
                RampSegment {
                    beta: 0.0,
                    length: 500.0,
                },
                RampSegment {
                    beta: PI / 12.0,
                    length: f64::INFINITY,
                },
            ],
            preset: Preset::Full,
        }
    }
}

impl SimConfig {
    /// Perceptual delay in samples.
    pub fn delay_samples(&self) -> usize {
        (self.tau / self.step).round() as usize
    }

    /// Detection window in samples.
    pub fn window_samples(&self) -> usize {
        (self.window / self.step).round() as usize
    }

    /// Number of integration steps in a run.
    pub fn step_count(&self) -> usize {
        (self.duration / self.step).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.step.is_finite() && self.step > 0.0,
            "T",
            "must be positive",
        )?;
        require(
            self.duration.is_finite() && self.duration >= 0.0,
            "duration",
            "must be non-negative",
        )?;
        require(
            self.tau.is_finite() && self.tau >= 0.0,
            "tau",
            "must be non-negative",
        )?;
        require_integral(self.tau / self.step, "tau")?;
        require(
            self.feedback_gain.is_finite() && self.feedback_gain > 0.0,
            "k",
            "must be positive",
        )?;
        require(
            self.kp.is_finite() && self.kp > 0.0,
            "kp",
            "must be positive",
        )?;
        require(
            self.kd.is_finite() && self.kd > 0.0,
            "kd",
            "must be positive",
        )?;
        // Zero is allowed: a frozen estimate is how synchronization is
        // studied in isolation from learning.
        require(
            self.gamma.is_finite() && self.gamma >= 0.0,
            "gamma",
            "must be non-negative",
        )?;
        require(
            self.window.is_finite() && self.window > 0.0,
            "window",
            "must be positive",
        )?;
        require_integral(self.window / self.step, "window")?;
        require(
            self.window_samples() >= 1,
            "window",
            "must span at least one sample",
        )?;
        require(
            self.b_event.is_finite() && self.b_event > 0.0,
            "b_event",
            "must be positive",
        )?;
        require(
            self.refractory.is_finite() && self.refractory >= 0.0,
            "refractory",
            "must be non-negative",
        )?;
        require(
            self.sigma_floor.is_finite() && self.sigma_floor > 0.0,
            "sigma_floor",
            "must be positive",
        )?;
        require(self.g.is_finite() && self.g > 0.0, "g", "must be positive")?;
        require(
            !self.segments.is_empty(),
            "segments",
            "must list at least one segment",
        )?;
        for (i, seg) in self.segments.iter().enumerate() {
            require(
                seg.beta.is_finite(),
                "segments",
                format!("segment {i}: slope must be finite"),
            )?;
            require(
                seg.length > 0.0,
                "segments",
                format!("segment {i}: length must be positive"),
            )?;
            require(
                seg.length.is_finite() || i == self.segments.len() - 1,
                "segments",
                format!("segment {i}: only the last segment may be infinite"),
            )?;
        }
        Ok(())
    }
}

fn require(ok: bool, key: &str, reason: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid_config(key, reason))
    }
}

/// Delays and windows are realized in whole samples; reject ratios that are
/// not integral to within 1e-9 relative.
fn require_integral(ratio: f64, key: &str) -> Result<()> {
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.abs().max(1.0) {
        Ok(())
    } else {
        Err(Error::invalid_config(
            key,
            format!("must be an integer multiple of T ({key}/T = {ratio})"),
        ))
    }
}

/// Parse the flat `key=value` format; absent keys keep their defaults.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ConfigSyntax {
                line: idx + 1,
                text: line.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "T" => cfg.step = parse_num(key, value)?,
            "duration" => cfg.duration = parse_num(key, value)?,
            "tau" => cfg.tau = parse_num(key, value)?,
            "k" => cfg.feedback_gain = parse_num(key, value)?,
            "kp" => cfg.kp = parse_num(key, value)?,
            "kd" => cfg.kd = parse_num(key, value)?,
            "gamma" => cfg.gamma = parse_num(key, value)?,
            "window" => cfg.window = parse_num(key, value)?,
            "b_event" => cfg.b_event = parse_num(key, value)?,
            "refractory" => cfg.refractory = parse_num(key, value)?,
            "sigma_floor" => cfg.sigma_floor = parse_num(key, value)?,
            "g" => cfg.g = parse_num(key, value)?,
            "segments" => cfg.segments = parse_segments(value)?,
            "preset" => cfg.preset = value.parse()?,
            other => {
                return Err(Error::UnknownKey {
                    key: other.to_string(),
                })
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::invalid_config(key, format!("expected a number, got `{value}`")))
}

fn parse_segments(value: &str) -> Result<Vec<RampSegment>> {
    let mut out = Vec::new();
    for pair in value.split(';') {
        let Some((beta, length)) = pair.split_once(',') else {
            return Err(Error::invalid_config(
                "segments",
                format!("expected `beta,length`, got `{}`", pair.trim()),
            ));
        };
        out.push(RampSegment {
            beta: parse_num("segments", beta.trim())?,
            length: parse_num("segments", length.trim())?,
        });
    }
    Ok(out)
}

/// Read and parse a config file.
pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        let def = SimConfig::default();
        assert_eq!(cfg.step, def.step);
        assert_eq!(cfg.duration, 100.0);
        assert_eq!(cfg.tau, 0.65);
        assert_eq!(cfg.feedback_gain, 1.0);
        assert_eq!((cfg.kp, cfg.kd), (1.0, 2.0));
        assert_eq!(cfg.window, 10.0);
        assert_eq!(cfg.b_event, 3.0);
        assert_eq!(cfg.segments.len(), 3);
        assert!(cfg.segments[2].length.is_infinite());
        assert_eq!(cfg.preset, Preset::Full);
        assert_eq!(cfg.delay_samples(), 65);
        assert_eq!(cfg.window_samples(), 1000);
        assert_eq!(cfg.step_count(), 10000);
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let cfg = parse_config("# a comment\n\n  duration = 5  \n tau=0.1\n").unwrap();
        assert_eq!(cfg.duration, 5.0);
        assert_eq!(cfg.tau, 0.1);
    }

    #[test]
    fn every_key_round_trips() {
        let text = "T=0.02\nduration=4\ntau=0.1\nk=1.5\nkp=2\nkd=3\ngamma=0.5\nwindow=1\n\
                    b_event=4\nrefractory=0.5\nsigma_floor=1e-9\ng=9.8\n\
                    segments=0.1,100;0,50;0.1,inf\npreset=no-anticipation\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.step, 0.02);
        assert_eq!(cfg.duration, 4.0);
        assert_eq!(cfg.tau, 0.1);
        assert_eq!(cfg.feedback_gain, 1.5);
        assert_eq!(cfg.gamma, 0.5);
        assert_eq!(cfg.window_samples(), 50);
        assert_eq!(cfg.segments.len(), 3);
        assert_eq!(cfg.segments[1].length, 50.0);
        assert!(cfg.segments[2].length.is_infinite());
        assert_eq!(cfg.preset, Preset::NoAnticipation);
    }

    #[test]
    fn non_integral_delay_is_rejected() {
        let err = parse_config("tau=0.005\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref key, .. } if key == "tau"));
        // Integral within rounding noise passes.
        assert!(parse_config("tau=0.65\nT=0.01\n").is_ok());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("Tstep=1\n").unwrap_err();
        assert!(matches!(err, Error::UnknownKey { ref key } if key == "Tstep"));
    }

    #[test]
    fn missing_equals_is_a_syntax_error() {
        let err = parse_config("duration\n").unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 1, .. }));
    }

    #[test]
    fn bad_values_are_rejected_with_key() {
        for text in [
            "k=0\n",
            "kp=-1\n",
            "gamma=-0.1\n",
            "b_event=0\n",
            "sigma_floor=0\n",
            "duration=-1\n",
            "g=nan\n",
            "segments=0.1,0\n",
            "segments=0.1,inf;0,500\n",
            "segments=\n",
            "preset=fast\n",
        ] {
            assert!(parse_config(text).is_err(), "accepted: {text}");
        }
    }

    #[test]
    fn degenerate_but_valid_settings_pass() {
        assert_eq!(parse_config("duration=0\n").unwrap().step_count(), 0);
        assert_eq!(parse_config("gamma=0\n").unwrap().gamma, 0.0);
        assert_eq!(parse_config("tau=0\n").unwrap().delay_samples(), 0);
    }

    #[test]
    fn duplicate_key_keeps_last_value() {
        let cfg = parse_config("duration=5\nduration=7\n").unwrap();
        assert_eq!(cfg.duration, 7.0);
    }
}
