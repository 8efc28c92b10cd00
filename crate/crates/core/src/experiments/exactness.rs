use super::{Check, E6Config, RunContext};
use crate::error::{Error, Result};
use crate::exact::{rational_from_str, rational_to_string};
use crate::poly::{even_monomials, reduce_la, HarmonicBasis, PolyDirichletSolver, WeightedPoly};
use crate::weight::WeightParam;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

fn parse_a(n: usize, text: &str) -> Result<WeightParam> {
    let q = rational_from_str(text).ok_or_else(|| Error::Config(format!("bad rational a = {text:?}")))?;
    let (num, den) = (q.numer().to_i64(), q.denom().to_i64());
    match (num, den) {
        (Some(p), Some(d)) => WeightParam::from_a_ratio(n, p, d),
        _ => Err(Error::Config(format!("a = {text} does not fit in i64"))),
    }
}

fn tag(a: &str) -> String {
    a.replace('-', "m").replace('/', "_")
}

#[derive(serde::Serialize)]
struct SolveRow {
    n: usize,
    a: String,
    monomial: String,
    degree: u32,
    reduce_zero: bool,
    divisible: bool,
}

struct SuiteOutcome {
    monomials: usize,
    reduce_failures: usize,
    divisibility_failures: usize,
    rows: Vec<SolveRow>,
}

fn solve_suite(w: &WeightParam, a: &str, degree: u32) -> Result<SuiteOutcome> {
    let n = w.n();
    let solver = PolyDirichletSolver::new(w, degree)?;
    let mut out = SuiteOutcome {
        monomials: 0,
        reduce_failures: 0,
        divisibility_failures: 0,
        rows: Vec::new(),
    };
    for m in even_monomials(n, degree) {
        let p = WeightedPoly::from_terms(n, [(m.clone(), BigRational::one())]);
        let solved = solver.solve(&p)?;
        let reduce_zero = reduce_la(&solved, w)?.is_zero();
        let divisible = p.sub(&solved).divide_by_one_minus_r2().is_some();
        out.monomials += 1;
        out.reduce_failures += usize::from(!reduce_zero);
        out.divisibility_failures += usize::from(!divisible);
        out.rows.push(SolveRow {
            n,
            a: a.to_string(),
            monomial: format!("x^{:?} y^{}", m.alpha, m.b),
            degree: m.degree(),
            reduce_zero,
            divisible,
        });
    }
    Ok(out)
}

struct GramOutcome {
    size: usize,
    cross_degree_nonzero: usize,
    within_degree_error: f64,
}

fn gram_suite(basis: &HarmonicBasis) -> GramOutcome {
    let exact = basis.exact_gram();
    let gram = basis.gram();
    let mut cross = 0;
    let mut err: f64 = 0.0;
    for (i, p) in basis.members.iter().enumerate() {
        for (j, q) in basis.members.iter().enumerate() {
            if p.degree != q.degree {
                cross += usize::from(!exact[i][j].is_zero());
            } else {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram[i][j] - target).abs());
            }
        }
    }
    GramOutcome {
        size: basis.len(),
        cross_degree_nonzero: cross,
        within_degree_error: err,
    }
}

/// `(1+a)/(2+a) (1 - x^2) + y^2/(2+a)` for `n = 1`.
pub(crate) fn worked_y2_oracle(a: &BigRational) -> WeightedPoly {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let c = (&one + a) / (&two + a);
    let d = &one / (&two + a);
    WeightedPoly::constant(1, c.clone())
        .sub(&WeightedPoly::monomial(1, vec![2], 0, c))
        .add(&WeightedPoly::monomial(1, vec![0], 2, d))
}

pub(super) fn run(cfg: &E6Config, ctx: &mut RunContext) {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for a in &cfg.a {
            let label = format!("n={n} a={a}");
            let Some(w) = ctx.attempt(Some(1), &format!("weight {label}"), parse_a(n, a)) else {
                continue;
            };
            if let Some(s) = ctx.attempt(Some(1), &format!("dirichlet solves {label}"), solve_suite(&w, a, cfg.degree)) {
                ctx.check(
                    Check::at_most(Some(1), format!("reduce_la of solve is zero, {label}"), s.reduce_failures as f64, 0.0)
                        .detail(format!("{} monomials up to degree {}", s.monomials, cfg.degree)),
                );
                ctx.check(
                    Check::at_most(Some(1), format!("p - solve divisible by 1-r^2, {label}"), s.divisibility_failures as f64, 0.0)
                        .detail(format!("{} monomials", s.monomials)),
                );
                rows.extend(s.rows);
            }
            if let Some(basis) = ctx.attempt(Some(1), &format!("harmonic basis {label}"), HarmonicBasis::new(&w, cfg.degree)) {
                let g = gram_suite(&basis);
                ctx.check(
                    Check::at_most(Some(1), format!("gram cross-degree entries exactly zero, {label}"), g.cross_degree_nonzero as f64, 0.0)
                        .detail(format!("basis size {}", g.size)),
                );
                ctx.check(Check::at_most(
                    Some(1),
                    format!("gram within-degree deviation from identity, {label}"),
                    g.within_degree_error,
                    cfg.gram_tol,
                ));
                ctx.write_json(&format!("basis_n{n}_a{}.json", tag(a)), &basis.to_json());
            }
            if n == 1 {
                let got = PolyDirichletSolver::new(&w, 2).and_then(|s| s.solve(&WeightedPoly::monomial(1, vec![0], 2, BigRational::one())));
                if let Some(got) = ctx.attempt(Some(2), &format!("worked y^2 solve, a={a}"), got) {
                    let oracle = worked_y2_oracle(&w.a_rational());
                    let exact = got.sub(&oracle).is_zero();
                    ctx.check(Check::new(Some(2), format!("worked y^2 solve matches oracle exactly, a={a}"), exact).detail(format!(
                        "a = {}, c = {}",
                        rational_to_string(&w.a_rational()),
                        rational_to_string(&got.coefficient(&crate::weight::MonomialExponent::constant(1)))
                    )));
                }
            }
        }
    }
    ctx.write_csv("solves.csv", &rows);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_at_zero() {
        // a = 0: (1 - x^2)/2 + y^2/2
        let p = worked_y2_oracle(&BigRational::zero());
        assert!((p.eval(&[0.0], 0.0) - 0.5).abs() < 1e-15);
        assert!((p.eval(&[0.0], 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parses_rational_a() {
        let w = parse_a(1, "-1/2").unwrap();
        assert_eq!(w.a(), -0.5);
        assert!(parse_a(1, "x").is_err());
    }
}
