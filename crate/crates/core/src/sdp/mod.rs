//! Small dense semidefinite programs.

mod ipm;
mod problem;

pub use ipm::solve;
pub use problem::{
    BlockKind, Coefficient, Constraint, LinearForm, Relation, ScalarKind, SdpProblem, SdpSolution, SdpStatus, Sense, SolverOptions,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, CMat, RMat};
    use num_complex::Complex64;

    fn trace_form(block: usize, n: usize) -> LinearForm {
        LinearForm::new().block(block, Coefficient::Real(RMat::identity(n, n)))
    }

    #[test]
    fn diagonal_toy_picks_largest_eigenvalue() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_block(BlockKind::Symmetric, 2);
        p.objective = LinearForm::new().block(
            x,
            Coefficient::Real(RMat::from_diagonal(&crate::linalg::RVec::from_vec(alloc::vec![1.0, 2.0]))),
        );
        p.constrain(trace_form(x, 2), Relation::Eq, 1.0, "trace");
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-7, "{}", s.objective);
        assert!((s.blocks[x][(1, 1)].re - 1.0).abs() < 1e-6);
        assert!(s.blocks[x][(0, 0)].re.abs() < 1e-6);
    }

    #[test]
    fn scalar_block_is_a_linear_program() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_block(BlockKind::Symmetric, 1);
        p.objective = trace_form(x, 1);
        p.constrain(trace_form(x, 1), Relation::Le, 3.0, "cap");
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-6);
    }

    #[test]
    fn hermitian_block_reaches_top_eigenvalue() {
        let c = CMat::from_row_slice(
            3,
            3,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.2, 0.7),
                Complex64::new(-0.4, 0.1),
                Complex64::new(0.2, -0.7),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, -0.3),
                Complex64::new(-0.4, -0.1),
                Complex64::new(0.0, 0.3),
                Complex64::new(-1.0, 0.0),
            ],
        );
        let (vals, _) = hermitian_eigen(&c);
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_block(BlockKind::Hermitian, 3);
        p.objective = LinearForm::new().block(x, Coefficient::Complex(c));
        p.constrain(trace_form(x, 3), Relation::Eq, 1.0, "trace");
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.objective - vals[0]).abs() < 1e-6);
        if let Some(bound) = s.dual_bound {
            assert!(s.objective <= bound + 1e-6);
        }
    }

    #[test]
    fn free_scalar_epigraph() {
        // maximize t with t <= X_00, t <= X_11, Tr X = 1  ->  t = 1/2
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_block(BlockKind::Symmetric, 2);
        let t = p.add_scalar(ScalarKind::Free);
        p.objective = LinearForm::new().scalar(t, 1.0);
        for i in 0..2 {
            p.constrain(
                LinearForm::new().block(x, Coefficient::entry(i, i, 1.0)).scalar(t, -1.0),
                Relation::Ge,
                0.0,
                "epigraph",
            );
        }
        p.constrain(trace_form(x, 2), Relation::Eq, 1.0, "trace");
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.scalars[t] - 0.5).abs() < 1e-6, "{}", s.scalars[t]);
    }

    #[test]
    fn detects_infeasibility() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(BlockKind::Symmetric, 2);
        p.objective = trace_form(x, 2);
        p.constrain(trace_form(x, 2), Relation::Eq, -1.0, "negative trace");
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
    }

    #[test]
    fn constant_violated_row_is_infeasible() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(BlockKind::Symmetric, 1);
        p.objective = trace_form(x, 1);
        p.constrain(LinearForm::new(), Relation::Ge, 1.0, "impossible");
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
    }
}
