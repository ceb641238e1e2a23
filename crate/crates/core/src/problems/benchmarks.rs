//! Continuous benchmark functions on their canonical boxes.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percentile::Problem;
use crate::space::BoxSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    #[serde(alias = "rastrigrin2")]
    Rastrigin2,
    #[serde(alias = "rastrigrin10")]
    Rastrigin10,
    Ackley,
    Beale,
    Levi13,
    Himmelblau,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Rastrigin2,
        Benchmark::Rastrigin10,
        Benchmark::Ackley,
        Benchmark::Beale,
        Benchmark::Levi13,
        Benchmark::Himmelblau,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Rastrigin2 => "rastrigin2",
            Benchmark::Rastrigin10 => "rastrigin10",
            Benchmark::Ackley => "ackley",
            Benchmark::Beale => "beale",
            Benchmark::Levi13 => "levi13",
            Benchmark::Himmelblau => "himmelblau",
        }
    }

    /// Canonical dimension, box and global minimum.
    pub fn spec(self) -> BenchmarkSpec {
        // Rastrigin: x_i in [-5.12, 5.12], f = 10d + sum(x^2 - 10 cos 2 pi x), min 0 at origin.
        // Ackley (2-D): [-5, 5]^2, min 0 at origin.
        // Beale: [-4.5, 4.5]^2, min 0 at (3, 0.5).
        // Levi N.13: [-10, 10]^2, min 0 at (1, 1).
        // Himmelblau: [-5, 5]^2, min 0 at (3, 2), (-2.805118, 3.131312),
        //   (-3.779310, -3.283186), (3.584428, -1.848126).
        let (dims, half_width) = match self {
            Benchmark::Rastrigin2 => (2, 5.12),
            Benchmark::Rastrigin10 => (10, 5.12),
            Benchmark::Ackley => (2, 5.0),
            Benchmark::Beale => (2, 4.5),
            Benchmark::Levi13 => (2, 10.0),
            Benchmark::Himmelblau => (2, 5.0),
        };
        BenchmarkSpec {
            benchmark: self,
            dims,
            lower: vec![-half_width; dims],
            upper: vec![half_width; dims],
            known_minimum: 0.0,
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Benchmark::Rastrigin2 | Benchmark::Rastrigin10 => rastrigin(x),
            Benchmark::Ackley => ackley(x[0], x[1]),
            Benchmark::Beale => beale(x[0], x[1]),
            Benchmark::Levi13 => levi13(x[0], x[1]),
            Benchmark::Himmelblau => himmelblau(x[0], x[1]),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rastrigin2" | "rastrigrin2" | "r-2" => Ok(Benchmark::Rastrigin2),
            "rastrigin10" | "rastrigrin10" | "r-10" => Ok(Benchmark::Rastrigin10),
            "ackley" | "ack" => Ok(Benchmark::Ackley),
            "beale" | "ble" => Ok(Benchmark::Beale),
            "levi13" | "levi" => Ok(Benchmark::Levi13),
            "himmelblau" | "himm" => Ok(Benchmark::Himmelblau),
            other => Err(Error::domain(format!("unknown benchmark `{other}`"))),
        }
    }
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

pub fn ackley(x: f64, y: f64) -> f64 {
    -20.0 * (-0.2 * (0.5 * (x * x + y * y)).sqrt()).exp()
        - (0.5 * ((2.0 * PI * x).cos() + (2.0 * PI * y).cos())).exp()
        + E
        + 20.0
}

pub fn beale(x: f64, y: f64) -> f64 {
    (1.5 - x + x * y).powi(2) + (2.25 - x + x * y * y).powi(2) + (2.625 - x + x * y.powi(3)).powi(2)
}

pub fn levi13(x: f64, y: f64) -> f64 {
    (3.0 * PI * x).sin().powi(2)
        + (x - 1.0).powi(2) * (1.0 + (3.0 * PI * y).sin().powi(2))
        + (y - 1.0).powi(2) * (1.0 + (2.0 * PI * y).sin().powi(2))
}

pub fn himmelblau(x: f64, y: f64) -> f64 {
    (x * x + y - 11.0).powi(2) + (x + y * y - 7.0).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub benchmark: Benchmark,
    pub dims: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub known_minimum: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    spec: BenchmarkSpec,
    space: BoxSpace,
}

impl BenchmarkProblem {
    pub fn spec(&self) -> &BenchmarkSpec {
        &self.spec
    }
}

pub fn make_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkProblem> {
    if *spec != spec.benchmark.spec() {
        return Err(Error::domain(format!(
            "{} spec does not match its canonical definition",
            spec.benchmark
        )));
    }
    Ok(BenchmarkProblem {
        space: BoxSpace::new(spec.lower.clone(), spec.upper.clone())?,
        spec: spec.clone(),
    })
}

/// Shorthand for `make_benchmark(&name.parse()?.spec())`.
pub fn benchmark_by_name(name: &str) -> Result<BenchmarkProblem> {
    make_benchmark(&name.parse::<Benchmark>()?.spec())
}

impl Problem for BenchmarkProblem {
    type Space = BoxSpace;

    fn space(&self) -> &BoxSpace {
        &self.space
    }

    fn cost(&self, x: &Vec<f64>) -> f64 {
        self.spec.benchmark.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::indexed_rng;
    use crate::space::Space;

    #[test]
    fn minima_are_zero() {
        assert_eq!(rastrigin(&[0.0, 0.0]), 0.0);
        assert_eq!(rastrigin(&[0.0; 10]), 0.0);
        assert!(ackley(0.0, 0.0).abs() < 1e-12);
        assert_eq!(beale(3.0, 0.5), 0.0);
        assert!(levi13(1.0, 1.0).abs() < 1e-30);
        assert_eq!(himmelblau(3.0, 2.0), 0.0);
        for (x, y) in [(-2.805118, 3.131312), (-3.779310, -3.283186), (3.584428, -1.848126)] {
            assert!(himmelblau(x, y) < 1e-9);
        }
    }

    #[test]
    fn rastrigin_corner_anchor() {
        // 20 + 2 * (5.12^2 - 10 cos(2 pi 5.12)); cos(10.24 pi) = cos(0.24 pi)
        let expected = 20.0 + 2.0 * (26.2144 - 10.0 * (0.24 * PI).cos());
        let got = rastrigin(&[5.12, 5.12]);
        assert!((got - expected).abs() < 1e-9);
        assert!((got - 57.849_427_451_571_79).abs() < 1e-9, "{got}");
    }

    #[test]
    fn names_parse() {
        assert_eq!("rastrigrin2".parse::<Benchmark>().unwrap(), Benchmark::Rastrigin2);
        assert_eq!("R-10".parse::<Benchmark>().unwrap(), Benchmark::Rastrigin10);
        assert!("rosenbrock".parse::<Benchmark>().is_err());
        for b in Benchmark::ALL {
            assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
        }
    }

    #[test]
    fn spec_mismatch_rejected() {
        let mut spec = Benchmark::Beale.spec();
        spec.upper[0] = 3.0;
        assert!(make_benchmark(&spec).is_err());
    }

    #[test]
    fn benchmarks_finite_on_their_boxes() {
        for b in Benchmark::ALL {
            let p = make_benchmark(&b.spec()).unwrap();
            let mut lo = f64::INFINITY;
            for i in 0..100_000u64 {
                let x = p.space().sample(&mut indexed_rng(17, i));
                let c = p.cost(&x);
                assert!(c.is_finite(), "{b} at {x:?}");
                assert!(c >= -1e-12, "{b} below its minimum at {x:?}");
                lo = lo.min(c);
            }
            assert!(lo >= p.spec().known_minimum - 1e-12);
        }
    }
}
