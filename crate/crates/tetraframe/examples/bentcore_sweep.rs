//! Minimizers of the bent-core potential across its parameter plane.

use tetraframe::analysis::bentcore::bentcore_minimize;

fn main() {
    println!("{:>6} {:>6}  {:<12} {:>12} {:>12}  lambdas", "alpha", "beta", "kind", "omega", "numerical");
    for &alpha in &[-0.5, 0.0, 0.5, 1.0] {
        for &beta in &[-2.5, -1.9, -1.0, 0.0, 0.5, 2.0] {
            let r = bentcore_minimize(alpha, beta);
            let lam = r.lambdas.map(|l| format!("({:.4}, {:.4}, {:.4})", l[0], l[1], l[2])).unwrap_or_else(|| "-".into());
            let num = r.numerical_omega.map(|n| format!("{n:.8}")).unwrap_or_else(|| "-".into());
            println!("{alpha:>6.2} {beta:>6.2}  {:<12} {:>12.8} {:>12}  {lam}", r.kind.to_string(), r.omega, num);
        }
    }
}
