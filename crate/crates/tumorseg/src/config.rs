use std::collections::HashSet;
use std::path::Path;

use ctxwin::ScaleSpec;
use segarch::{CascadeConfig, DetectorConfig, SegNetConfig, TrainOpts};

use crate::errors::{CliError, Result};

/// Every tunable the pipeline exposes, read from a plain-text key=value file.
/// Unknown keys are rejected so typos surface instead of silently using a
/// default.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub k_stride: usize,
    pub min_proposals: usize,
    pub proposals_per_window: usize,
    pub iou_threshold: f64,
    pub f_offset: usize,
    pub patch_dims: [usize; 3],
    pub scales: Vec<f64>,
    pub window_size: (usize, usize),
    pub batch: usize,
    pub lr: f64,
    pub momentum: f64,
    pub iterations: usize,
    pub seed: u64,
    pub score_floor: f64,
    pub dilations: [usize; 2],
    pub epsilon: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k_stride: 4,
            min_proposals: 2,
            proposals_per_window: 300,
            iou_threshold: 0.5,
            f_offset: 6,
            patch_dims: [64, 64, 64],
            scales: vec![0.5, 1.0, 2.0],
            window_size: (32, 32),
            batch: 4,
            lr: 0.01,
            momentum: 0.9,
            iterations: 300,
            seed: 0,
            score_floor: 0.5,
            dilations: [2, 3],
            epsilon: 1e-5,
        }
    }
}

fn bad_value(key: &str, value: &str) -> CliError {
    CliError::Usage(format!("config key {key} has unparsable value '{value}'"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad_value(key, value))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str, want: usize) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad_value(key, value)))
        .collect::<Result<_>>()?;
    if want > 0 && items.len() != want {
        return Err(CliError::Usage(format!(
            "config key {key} needs {want} comma-separated values, got {}",
            items.len()
        )));
    }
    Ok(items)
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", idx + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Usage(format!("config key {key} given twice")));
            }
            match key {
                "K" => cfg.k_stride = parse_num(key, value)?,
                "min_proposals" => cfg.min_proposals = parse_num(key, value)?,
                "proposals_per_window" => cfg.proposals_per_window = parse_num(key, value)?,
                "iou_threshold" => cfg.iou_threshold = parse_num(key, value)?,
                "f_offset" => cfg.f_offset = parse_num(key, value)?,
                "patch_dims" => {
                    let v: Vec<usize> = parse_list(key, value, 3)?;
                    cfg.patch_dims = [v[0], v[1], v[2]];
                }
                "scales" => {
                    cfg.scales = parse_list(key, value, 0)?;
                    if cfg.scales.is_empty() {
                        return Err(bad_value(key, value));
                    }
                }
                "window_size" => {
                    let v: Vec<usize> = parse_list(key, value, 2)?;
                    cfg.window_size = (v[0], v[1]);
                }
                "batch" => cfg.batch = parse_num(key, value)?,
                "lr" => cfg.lr = parse_num(key, value)?,
                "momentum" => cfg.momentum = parse_num(key, value)?,
                "iterations" => cfg.iterations = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "score_floor" => cfg.score_floor = parse_num(key, value)?,
                "dilations" => {
                    let v: Vec<usize> = parse_list(key, value, 2)?;
                    cfg.dilations = [v[0], v[1]];
                }
                "epsilon" => cfg.epsilon = parse_num(key, value)?,
                other => {
                    return Err(CliError::Usage(format!("unknown config key '{other}'")));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_stride == 0 {
            return Err(CliError::Usage("K must be positive".into()));
        }
        if self.k_stride > self.window_size.0.min(self.window_size.1) {
            return Err(CliError::Usage(
                "stride K must not exceed either window side".into(),
            ));
        }
        if self.scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(CliError::Usage("scales must be positive and finite".into()));
        }
        if !(self.iou_threshold.is_finite() && (0.0..=1.0).contains(&self.iou_threshold)) {
            return Err(CliError::Usage("iou_threshold must lie in [0, 1]".into()));
        }
        if self.patch_dims.iter().any(|&d| d == 0) {
            return Err(CliError::Usage("patch_dims must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(CliError::Usage("iterations must be positive".into()));
        }
        if self.batch == 0 {
            return Err(CliError::Usage("batch must be positive".into()));
        }
        if !self.lr.is_finite() || !self.momentum.is_finite() || !self.epsilon.is_finite() {
            return Err(CliError::Usage(
                "lr, momentum and epsilon must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn segnet(&self) -> SegNetConfig {
        SegNetConfig {
            patch_dims: self.patch_dims,
            dilations: self.dilations,
            batch: self.batch,
            ..SegNetConfig::default()
        }
    }

    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig {
            score_floor: self.score_floor,
            ..DetectorConfig::default()
        }
    }

    pub fn cascade(&self) -> CascadeConfig {
        // Crop at the same resolution the net was trained on; a scale the
        // features have never seen degrades boundary classes badly.
        CascadeConfig {
            f_offset: self.f_offset,
            score_floor: self.score_floor,
            infer_patch_dims: self.patch_dims,
            ..CascadeConfig::default()
        }
    }

    pub fn train_opts(&self) -> TrainOpts {
        TrainOpts {
            lr: self.lr,
            momentum: self.momentum,
            iterations: self.iterations,
            seed: self.seed,
            eps: self.epsilon,
        }
    }

    /// One scale spec per configured pyramid factor, in file order.
    pub fn scale_specs(&self, original_dims: (usize, usize)) -> Result<Vec<ScaleSpec>> {
        self.scales
            .iter()
            .enumerate()
            .map(|(id, &f)| ScaleSpec::new(id, f, original_dims).map_err(CliError::from))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let c = RunConfig::default();
        assert_eq!(c.k_stride, 4);
        assert_eq!(c.min_proposals, 2);
        assert_eq!(c.proposals_per_window, 300);
        assert_eq!(c.iou_threshold, 0.5);
        assert_eq!(c.f_offset, 6);
        assert_eq!(c.patch_dims, [64, 64, 64]);
        assert_eq!(c.scales, vec![0.5, 1.0, 2.0]);
        assert_eq!(c.window_size, (32, 32));
        assert_eq!(c.dilations, [2, 3]);
    }

    #[test]
    fn parses_overrides_and_comments() {
        let text = "# training\nlr = 0.02\niterations=40\npatch_dims = 16,16,16\nscales=1\n";
        let c = RunConfig::from_text(text).unwrap();
        assert_eq!(c.lr, 0.02);
        assert_eq!(c.iterations, 40);
        assert_eq!(c.patch_dims, [16, 16, 16]);
        assert_eq!(c.scales, vec![1.0]);
        assert_eq!(c.momentum, 0.9);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::from_text("learning_rate=0.1\n").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert!(err.to_string().contains("learning_rate"));
    }

    #[test]
    fn duplicate_and_malformed_lines_are_rejected() {
        assert!(RunConfig::from_text("lr=0.1\nlr=0.2\n").is_err());
        assert!(RunConfig::from_text("just words\n").is_err());
        assert!(RunConfig::from_text("lr=fast\n").is_err());
    }

    #[test]
    fn stride_wider_than_window_is_rejected() {
        let err = RunConfig::from_text("K=40\n").unwrap_err();
        assert!(err.to_string().contains("stride"));
    }

    #[test]
    fn conversions_carry_the_right_fields() {
        let c = RunConfig::from_text("f_offset=3\nscore_floor=0.7\ndilations=2,4\nepsilon=1e-4\n")
            .unwrap();
        assert_eq!(c.segnet().dilations, [2, 4]);
        assert_eq!(c.detector().score_floor, 0.7);
        assert_eq!(c.cascade().f_offset, 3);
        assert_eq!(c.train_opts().eps, 1e-4);
        let specs = c.scale_specs((64, 64)).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].scaled_dims, (32, 32));
    }
}
