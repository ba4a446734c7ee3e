//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here deliberately avoids the library's own computational
//! paths: eigenvalues come from inertia bisection instead of Jacobi
//! rotations, equilibria from direct linear solves instead of fixed-point
//! iteration, so agreement between the two routes is meaningful.

#![allow(dead_code)]

use proxnet_core::linalg::Mat;
use proxnet_core::rng::SplitMix64;
use proxnet_core::{
    AdjacencyMatrix, AgentCost, BoxRegion, CollectiveState, ConvexSet, GameInstance, ObstacleSet,
    RobotScenario, WeightMatrix, DEFAULT_ROW_TOL,
};

/// The four-robot communication matrix of the reference simulation.
pub fn reference_matrix_rows() -> Vec<Vec<f64>> {
    vec![
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.4, 0.5, 0.1, 0.0],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![0.25, 0.25, 0.25, 0.25],
    ]
}

pub fn reference_adjacency() -> AdjacencyMatrix {
    AdjacencyMatrix::from_rows(&reference_matrix_rows(), DEFAULT_ROW_TOL).unwrap()
}

/// The published diagonal weight values of the reference simulation.
pub fn reference_weights() -> WeightMatrix {
    WeightMatrix::diagonal(vec![0.186, 0.214, 0.055, 0.03]).unwrap()
}

pub fn reference_initial_positions() -> Vec<Vec<f64>> {
    vec![
        vec![5.0, 0.0],
        vec![20.0, 0.0],
        vec![50.0, 0.0],
        vec![10.0, 0.0],
    ]
}

pub fn reference_targets() -> Vec<Vec<f64>> {
    vec![
        vec![100.0, 100.0],
        vec![60.0, 100.0],
        vec![0.0, 50.0],
        vec![100.0, 50.0],
    ]
}

/// Obstacle used by the avoidance reproduction: a rectangle blocking the
/// corridor between the start line and the target area.
pub fn corridor_obstacle() -> BoxRegion {
    BoxRegion::new(vec![50.0, 45.0], vec![10.0, 5.0]).unwrap()
}

pub fn reference_scenario(obstacles: ObstacleSet) -> RobotScenario {
    RobotScenario::new(
        reference_initial_positions(),
        reference_targets(),
        vec![2.5; 4],
        5.0,
        1.0,
        obstacles,
        reference_adjacency(),
        reference_weights(),
        0.5,
        2000,
    )
    .unwrap()
}

/// Two scalar agents with uniform averaging, unit discover gain, targets 0
/// and 2: the closed-form equilibrium is (0.5, 1.5).
pub fn two_agent_scalar_game() -> GameInstance {
    let p = AdjacencyMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]], DEFAULT_ROW_TOL).unwrap();
    let constraint = ConvexSet::Box(BoxRegion::new(vec![0.0], vec![10.0]).unwrap());
    let costs = vec![
        AgentCost::new(1.0, vec![0.0], constraint.clone(), vec![0.5]).unwrap(),
        AgentCost::new(1.0, vec![2.0], constraint, vec![0.5]).unwrap(),
    ];
    let q = WeightMatrix::diagonal(vec![0.5, 0.5]).unwrap();
    GameInstance::new(p, costs, q, 0.5).unwrap()
}

/// Solves the interior equilibrium system `((1+γ)I − diag(γ) relaxed) x = γ x*`
/// for scalar agents with common gain: `(1+γ) x_i − (P x)_i = γ x*_i`,
/// by dense Gaussian elimination with partial pivoting.
pub fn linear_nwe_solve(p: &Mat, gamma: f64, targets: &[f64]) -> Vec<f64> {
    let n = p.rows();
    let mut a = Mat::from_fn(n, n, |i, j| {
        let diag = if i == j { 1.0 + gamma } else { 0.0 };
        diag - p.at(i, j)
    });
    let mut b: Vec<f64> = targets.iter().map(|t| gamma * t).collect();
    solve_in_place(&mut a, &mut b);
    b
}

/// Gaussian elimination with partial pivoting; overwrites `b` with the
/// solution.
pub fn solve_in_place(a: &mut Mat, b: &mut [f64]) {
    let n = a.rows();
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a.at(i, k).abs() > a.at(piv, k).abs() {
                piv = i;
            }
        }
        if piv != k {
            for j in 0..n {
                let t = a.at(k, j);
                a.set(k, j, a.at(piv, j));
                a.set(piv, j, t);
            }
            b.swap(k, piv);
        }
        let d = a.at(k, k);
        assert!(d.abs() > 1e-14, "singular system in test oracle");
        for i in (k + 1)..n {
            let f = a.at(i, k) / d;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a.set(i, j, a.at(i, j) - f * a.at(k, j));
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = b[k];
        for (j, bj) in b.iter().enumerate().take(n).skip(k + 1) {
            acc -= a.at(k, j) * bj;
        }
        b[k] = acc / a.at(k, k);
    }
}

/// Smallest eigenvalue of a symmetric matrix by inertia-count bisection:
/// the number of eigenvalues below `t` equals the number of negative pivots
/// in the symmetric elimination of `S − tI` (Sylvester's law). Entirely
/// independent of the Jacobi rotation path.
pub fn min_eig_bisection_oracle(s: &Mat, tol: f64) -> f64 {
    let n = s.rows();
    let count_below = |t: f64| -> usize {
        let mut work = s.clone();
        for i in 0..n {
            work.set(i, i, work.at(i, i) - t);
        }
        let mut negatives = 0;
        for k in 0..n {
            let mut piv = work.at(k, k);
            if piv == 0.0 {
                piv = 1e-300;
            }
            if piv < 0.0 {
                negatives += 1;
            }
            for i in (k + 1)..n {
                let f = work.at(i, k) / piv;
                if f == 0.0 {
                    continue;
                }
                for j in k..n {
                    work.set(i, j, work.at(i, j) - f * work.at(k, j));
                }
            }
        }
        negatives
    };

    // Gershgorin bracket
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| s.at(i, j).abs()).sum();
        lo = lo.min(s.at(i, i) - radius);
        hi = hi.max(s.at(i, i) + radius);
    }
    let mut lo = lo - 1.0;
    let mut hi = hi + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < tol {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Random row-stochastic matrix with strictly positive diagonal and full
/// support (hence strongly connected).
pub fn random_row_stochastic(rng: &mut SplitMix64, n: usize) -> AdjacencyMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|_| rng.uniform(0.05, 1.0)).collect();
            row[i] += 0.5;
            let total: f64 = row.iter().sum();
            row.iter().map(|v| v / total).collect()
        })
        .collect();
    AdjacencyMatrix::from_rows(&rows, DEFAULT_ROW_TOL).unwrap()
}

/// Random symmetric doubly-stochastic matrix that is also positive
/// semidefinite, built as `I − βL` with `L` a weighted Laplacian of the
/// complete graph and `β` below `1/λ_max(L)`. The uniform diagonal weight is
/// then a valid averagedness certificate at η = 0.5.
pub fn random_doubly_stochastic_psd(rng: &mut SplitMix64, n: usize) -> AdjacencyMatrix {
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.uniform(0.2, 1.0);
            w.set(i, j, v);
            w.set(j, i, v);
        }
    }
    let degrees: Vec<f64> = (0..n).map(|i| w.row(i).iter().sum()).collect();
    let max_degree = degrees.iter().cloned().fold(0.0f64, f64::max);
    let beta = 0.45 / max_degree;
    let p = Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0 - beta * degrees[i]
        } else {
            beta * w.at(i, j)
        }
    });
    AdjacencyMatrix::new(p, DEFAULT_ROW_TOL).unwrap()
}

/// Euclidean distance between two stacked states.
pub fn state_distance(a: &CollectiveState, b: &CollectiveState) -> f64 {
    a.flat()
        .iter()
        .zip(b.flat())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
