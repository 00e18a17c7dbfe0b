use otkit::solver::{solve_mk, MkSolution, SolveConfig};
use otkit::{CostMatrix, Marginal};

fn main() -> otkit::Result<()> {
    let mu = Marginal::from_slice(&[0.7, 0.3])?;
    let nu = Marginal::from_slice(&[0.4, 0.6])?;
    let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]])?;
    match solve_mk(&mu, &nu, &c, &SolveConfig::default())? {
        MkSolution::Optimal(r) => println!("value {}", r.value),
        MkSolution::Infeasible(cut) => println!("no coupling: {:?}", cut.a_subset),
    }
    Ok(())
}
