//! Random ellipsoid-intersection instances and their on-disk form.
//!
//! Every instance keeps the unit ball inside each set (the radius rule
//! guarantees it), so the family always has a common point, and the
//! start point is placed on a sphere wide enough to sit outside every
//! set. Generation is deterministic per (m, n, seed): each set draws
//! from its own RNG substream, so changing m does not disturb the sets
//! that are shared between two instance sizes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::linalg::{SpdMatrix, Vector};
use crate::rng::SplitMix64;
use crate::sets::{ConvexSet, Ellipsoid};

/// Tolerance handed to the spectral-norm estimate that sizes each
/// radius. Far below the margin scale, so radii are stable to rerun.
const SPECTRAL_TOL: f64 = 1e-10;

/// Resampling budget for the start point. The sphere radius already
/// clears every set, so the budget is a safety net, not a loop that is
/// expected to spin.
const X0_ATTEMPTS: usize = 100;

const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Column count of the random factor A in Q = AA^T + lambda I.
    pub factor_cols: usize,
    /// Uniform range for the diagonal shift lambda; the low end must be
    /// positive so Q is certifiably positive definite.
    pub lambda_range: [f64; 2],
    /// Uniform range for each center coordinate.
    pub center_range: [f64; 2],
    /// Scale on the smallest radius that keeps the unit ball inside the
    /// set; must be at least 1.
    pub margin: f64,
}

impl GeneratorParams {
    pub fn default_for(n: usize) -> Self {
        GeneratorParams {
            factor_cols: n,
            lambda_range: [0.1, 1.0],
            center_range: [-1.0, 1.0],
            margin: 1.0,
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        let [llo, lhi] = self.lambda_range;
        if !(llo > 0.0 && lhi >= llo && lhi.is_finite()) {
            return Err(CoreError::InvalidInstance(format!(
                "lambda_range must satisfy 0 < lo <= hi, got [{llo}, {lhi}]"
            )));
        }
        let [clo, chi] = self.center_range;
        if !(clo <= chi && clo.is_finite() && chi.is_finite()) {
            return Err(CoreError::InvalidInstance(format!(
                "center_range must satisfy lo <= hi, got [{clo}, {chi}]"
            )));
        }
        if !(self.margin >= 1.0 && self.margin.is_finite()) {
            return Err(CoreError::InvalidInstance(format!(
                "margin below 1 breaks unit-ball containment, got {}",
                self.margin
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub params: GeneratorParams,
    pub sets: Vec<Ellipsoid>,
    pub x0: Vector,
}

/// Standard normal via Box-Muller; uses two uniform draws per pair.
fn gaussian_vector(rng: &mut SplitMix64, n: usize) -> Vector {
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = 1.0 - rng.next_f64(); // (0, 1]: log stays finite
        let u2 = rng.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(n);
    Vector::from_slice(&out)
}

pub fn generate(m: usize, n: usize, seed: u64) -> Result<Instance, CoreError> {
    generate_with(m, n, seed, GeneratorParams::default_for(n))
}

pub fn generate_with(
    m: usize,
    n: usize,
    seed: u64,
    params: GeneratorParams,
) -> Result<Instance, CoreError> {
    if m < 1 || n < 1 {
        return Err(CoreError::InvalidInstance(format!(
            "need m >= 1 and n >= 1, got m={m}, n={n}"
        )));
    }
    params.validate()?;

    let mut sets = Vec::with_capacity(m);
    let mut lambda_min = f64::INFINITY;
    let mut eta_max = 0.0_f64;
    for i in 0..m {
        // draw order inside the substream is part of the format:
        // factor rows, then lambda, then the center
        let mut rng = SplitMix64::substream(seed, i as u64);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..params.factor_cols).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect();
        let lambda = rng.uniform(params.lambda_range[0], params.lambda_range[1]);
        let center: Vec<f64> = (0..n)
            .map(|_| rng.uniform(params.center_range[0], params.center_range[1]))
            .collect();

        let shape = SpdMatrix::from_fn(n, |r, c| {
            let dot: f64 = rows[r].iter().zip(&rows[c]).map(|(a, b)| a * b).sum();
            if r == c {
                dot + lambda
            } else {
                dot
            }
        });
        let center = Vector::from_slice(&center);
        let radius = params.margin * (1.0 + center.norm()) * shape.spectral_norm(SPECTRAL_TOL)?.sqrt();

        lambda_min = lambda_min.min(lambda);
        eta_max = eta_max.max(radius);
        sets.push(Ellipsoid::new(center, shape, radius)?);
    }

    // Sphere radius 2 * eta_max / sqrt(lambda_min): every set lies in a
    // ball of radius eta_i / sqrt(lambda_i) around its center, and the
    // radius rule makes that at least 1 + ||y_i||, so this sphere
    // clears every set with room to spare.
    let sphere_radius = 2.0 * eta_max / lambda_min.sqrt();
    let mut rng = SplitMix64::substream(seed, m as u64);
    let mut x0 = None;
    for _ in 0..X0_ATTEMPTS {
        let dir = gaussian_vector(&mut rng, n);
        let norm = dir.norm();
        if norm < 1e-12 {
            continue;
        }
        let candidate = dir.scale(sphere_radius / norm);
        if sets.iter().all(|s| s.violation(&candidate, 0.0) > 0.0) {
            x0 = Some(candidate);
            break;
        }
    }
    let x0 = match x0 {
        Some(v) => v,
        None => {
            // deterministic fallback: step radially out of the first set
            let s0 = &sets[0];
            let mut e = vec![0.0; n];
            e[0] = sphere_radius + s0.center().norm() + 1.0;
            &Vector::from_slice(&e) + s0.center()
        }
    };

    Ok(Instance {
        m,
        n,
        seed,
        params,
        sets,
        x0,
    })
}

#[derive(Serialize, Deserialize)]
struct EllipsoidFile {
    center: Vec<f64>,
    shape: Vec<Vec<f64>>,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: String,
    m: usize,
    n: usize,
    seed: u64,
    generator: GeneratorParams,
    sets: Vec<EllipsoidFile>,
    x0: Vec<f64>,
}

impl Instance {
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            version: SCHEMA_VERSION.to_string(),
            m: self.m,
            n: self.n,
            seed: self.seed,
            generator: self.params,
            sets: self
                .sets
                .iter()
                .map(|s| EllipsoidFile {
                    center: s.center().as_slice().to_vec(),
                    shape: (0..self.n)
                        .map(|r| (0..self.n).map(|c| s.shape().get(r, c)).collect())
                        .collect(),
                    radius: s.radius(),
                })
                .collect(),
            x0: self.x0.as_slice().to_vec(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance, CoreError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))?;
        if file.version != SCHEMA_VERSION {
            return Err(CoreError::SchemaVersionMismatch {
                found: file.version,
                expected: SCHEMA_VERSION,
            });
        }
        if file.sets.len() != file.m {
            return Err(CoreError::InvalidInstance(format!(
                "m = {} but {} sets present",
                file.m,
                file.sets.len()
            )));
        }
        let mut sets = Vec::with_capacity(file.m);
        for ef in &file.sets {
            if ef.center.len() != file.n {
                return Err(CoreError::InvalidInstance(format!(
                    "center of dim {} in an n = {} instance",
                    ef.center.len(),
                    file.n
                )));
            }
            let shape = SpdMatrix::from_rows(&ef.shape)?;
            let center = Vector::new(ef.center.clone())?;
            sets.push(Ellipsoid::new(center, shape, ef.radius)?);
        }
        if file.x0.len() != file.n {
            return Err(CoreError::InvalidInstance(format!(
                "x0 of dim {} in an n = {} instance",
                file.x0.len(),
                file.n
            )));
        }
        Ok(Instance {
            m: file.m,
            n: file.n,
            seed: file.seed,
            params: file.generator,
            sets,
            x0: Vector::new(file.x0.clone())?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Instance, CoreError> {
        let text = std::fs::read_to_string(path)?;
        Instance::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::violation;

    #[test]
    fn generation_is_deterministic() {
        let a = generate(3, 10, 42).unwrap();
        let b = generate(3, 10, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate(3, 10, 43).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn unit_ball_is_inside_every_set() {
        for seed in [1_u64, 7, 99] {
            let inst = generate(4, 6, seed).unwrap();
            let origin = Vector::zeros(6);
            let mut e1 = vec![0.0; 6];
            e1[0] = 1.0;
            let e1 = Vector::from_slice(&e1);
            for s in &inst.sets {
                assert!(s.gauge(&origin).unwrap().value <= 0.0);
                assert!(s.gauge(&e1).unwrap().value <= 0.0);
            }
        }
    }

    #[test]
    fn interior_is_nonempty_at_origin() {
        // strict: the open unit ball sits inside each set
        for seed in 1..=10_u64 {
            let inst = generate(3, 5, seed).unwrap();
            assert!(violation(&inst.sets, &Vector::zeros(5), 0.0) < 0.0);
        }
    }

    #[test]
    fn start_point_is_outside_every_set() {
        for seed in 1..=20_u64 {
            let inst = generate(5, 4, seed).unwrap();
            for s in &inst.sets {
                assert!(s.gauge(&inst.x0).unwrap().value > 0.0, "seed {seed}");
            }
        }
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let inst = generate(3, 10, 42).unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst.m, back.m);
        assert_eq!(inst.seed, back.seed);
        for (a, b) in inst.sets.iter().zip(&back.sets) {
            assert_eq!(a.radius().to_bits(), b.radius().to_bits());
            for (x, y) in a.center().iter().zip(b.center().iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            for r in 0..inst.n {
                for c in 0..inst.n {
                    assert_eq!(a.shape().get(r, c).to_bits(), b.shape().get(r, c).to_bits());
                }
            }
        }
        for (x, y) in inst.x0.iter().zip(back.x0.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // and the re-serialization is the same bytes
        assert_eq!(inst.to_json(), back.to_json());
    }

    #[test]
    fn load_rejects_negative_radius() {
        let mut inst = generate(2, 2, 1).unwrap();
        let mut tree: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        tree["sets"][0]["radius"] = serde_json::json!(-1.0);
        assert!(matches!(
            Instance::from_json(&tree.to_string()),
            Err(CoreError::InvalidInstance(_))
        ));
        inst.sets.truncate(1);
        // while here: m / set-count mismatch is also rejected
        assert!(matches!(
            Instance::from_json(&inst.to_json()),
            Err(CoreError::InvalidInstance(_))
        ));
    }

    #[test]
    fn load_rejects_asymmetric_shape() {
        let text = r#"{
            "version": "1",
            "m": 1,
            "n": 2,
            "seed": 0,
            "generator": { "factor_cols": 2, "lambda_range": [0.1, 1.0], "center_range": [-1.0, 1.0], "margin": 1.0 },
            "sets": [ { "center": [0.0, 0.0], "shape": [[1.0, 0.5], [0.3, 1.0]], "radius": 2.0 } ],
            "x0": [5.0, 0.0]
        }"#;
        assert!(matches!(
            Instance::from_json(text),
            Err(CoreError::InvalidInstance(_))
        ));
    }

    #[test]
    fn load_rejects_unknown_schema_version() {
        let inst = generate(2, 2, 1).unwrap();
        let text = inst.to_json().replace("\"version\": \"1\"", "\"version\": \"2\"");
        assert!(matches!(
            Instance::from_json(&text),
            Err(CoreError::SchemaVersionMismatch { .. })
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = std::env::temp_dir().join("polyproj-instance-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m3-n4-seed7.json");
        let inst = generate(3, 4, 7).unwrap();
        inst.save(&path).unwrap();
        let back = Instance::load(&path).unwrap();
        assert_eq!(inst.to_json(), back.to_json());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn params_are_validated() {
        let mut p = GeneratorParams::default_for(3);
        p.lambda_range = [0.0, 1.0];
        assert!(generate_with(2, 3, 1, p).is_err());
        let mut p = GeneratorParams::default_for(3);
        p.margin = 0.5;
        assert!(generate_with(2, 3, 1, p).is_err());
        assert!(generate(0, 3, 1).is_err());
    }
}
