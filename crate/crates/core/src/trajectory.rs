//! Time series of observables along a simulated evolution.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Positivity/hermiticity slack tolerated while driving an evolution. Larger
/// violations mean the rates or the time step are misconfigured.
pub const TRAJECTORY_PSD_TOL: f64 = 1e-6;

/// Maps a state to the populations that should be recorded.
pub trait Observer {
    fn populations(&self, rho: &ComplexMatrix) -> Vec<f64>;
}

/// Records the diagonal of ρ in its own basis.
#[derive(Debug, Clone, Copy, Default)]
pub struct BasisPopulations;

impl Observer for BasisPopulations {
    fn populations(&self, rho: &ComplexMatrix) -> Vec<f64> {
        rho.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Expectation values `tr(P_k ρ)` of an arbitrary projector set.
#[derive(Debug, Clone)]
pub struct ProjectorSet(pub Vec<ComplexMatrix>);

impl Observer for ProjectorSet {
    fn populations(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.0.iter().map(|p| linalg::trace(&(p * rho)).re).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t_fs: f64,
    pub populations: Vec<f64>,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t_fs)
    }

    /// Population of basis/site `index` (0-based) over time.
    pub fn series(&self, index: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.populations[index]).collect()
    }

    /// Summed population of a set of 0-based indices over time.
    pub fn summed_series(&self, indices: &[usize]) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| indices.iter().map(|&i| p.populations[i]).sum())
            .collect()
    }

    /// The recorded point closest to `t_fs`, provided `t_fs` lies inside the span.
    pub fn point_at(&self, t_fs: f64) -> Result<&TrajectoryPoint> {
        let end = self.points.last().map_or(0.0, |p| p.t_fs);
        let start = self.points.first().map_or(0.0, |p| p.t_fs);
        let slack = self.points.get(1).map_or(0.0, |p| (p.t_fs - start) * 1e-9);
        if self.points.is_empty() || t_fs < start - slack || t_fs > end + slack {
            return Err(Error::TimeOutOfRange { requested: t_fs, end });
        }
        let best = self
            .points
            .iter()
            .min_by(|a, b| (a.t_fs - t_fs).abs().total_cmp(&(b.t_fs - t_fs).abs()))
            .expect("non-empty");
        Ok(best)
    }
}

/// Runs `steps` applications of `step` from `rho0`, sampling after each.
///
/// Fails with [`Error::StateInvalid`] as soon as the state loses hermiticity
/// or positivity beyond [`TRAJECTORY_PSD_TOL`]; the state itself is never
/// clipped.
pub fn drive<O, F>(
    rho0: &DensityMatrix,
    dt_fs: f64,
    steps: usize,
    observer: &O,
    mut step: F,
) -> Result<Trajectory>
where
    O: Observer + ?Sized,
    F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    let mut points = Vec::with_capacity(steps + 1);
    let mut rho = rho0.matrix().clone();
    points.push(sample(0, 0.0, &rho, observer)?);
    for k in 1..=steps {
        rho = step(&rho)?;
        points.push(sample(k, k as f64 * dt_fs, &rho, observer)?);
    }
    Ok(Trajectory { points })
}

fn sample<O: Observer + ?Sized>(
    k: usize,
    t_fs: f64,
    rho: &ComplexMatrix,
    observer: &O,
) -> Result<TrajectoryPoint> {
    let herm = linalg::hermiticity_deviation(rho);
    if !(herm <= TRAJECTORY_PSD_TOL) {
        return Err(Error::StateInvalid {
            step: k,
            reason: format!("hermiticity deviation {herm:e}"),
        });
    }
    let min_eigenvalue = linalg::hermitian_part(rho)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(min_eigenvalue >= -TRAJECTORY_PSD_TOL) {
        return Err(Error::StateInvalid {
            step: k,
            reason: format!("minimum eigenvalue {min_eigenvalue:e}"),
        });
    }
    Ok(TrajectoryPoint {
        t_fs,
        populations: observer.populations(rho),
        trace: linalg::trace(rho).re,
        min_eigenvalue,
    })
}
