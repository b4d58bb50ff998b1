//! Exact root finding for the small polynomials the algebra checker
//! handles (degree at most three, rational coefficients).  Every rational
//! root of such a polynomial is p/q with p dividing the constant term and
//! q the leading coefficient once denominators are cleared — so the full
//! rational solution set can be enumerated and tested exactly, which is
//! what makes an independent oracle for implication checking possible.

use guard::distill::Poly;
use num::{BigInt, BigRational, One, Signed, Zero};

/// All rational roots of `poly`.  `None` means every rational is a root
/// (the zero polynomial); `Some(vec)` is exhaustive otherwise.
pub fn rational_roots(poly: &Poly) -> Option<Vec<BigRational>> {
    let degree = poly.degree();
    if degree == 0 {
        return if poly.coeff(0).is_zero() {
            None // 0 = 0: everything solves it.
        } else {
            Some(Vec::new()) // c = 0 with c != 0: nothing does.
        };
    }

    // Clear denominators to get integer coefficients.
    let mut lcm = BigInt::one();
    for i in 0..=degree {
        let den = poly.coeff(i).denom();
        lcm = num::integer::lcm(lcm, den.clone());
    }
    let coeffs: Vec<BigInt> = (0..=degree)
        .map(|i| (poly.coeff(i) * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();

    // Factor out x^k so the constant term of what remains is nonzero.
    let low = coeffs
        .iter()
        .position(|c| !c.is_zero())
        .expect("nonzero polynomial has a nonzero coefficient");
    let mut roots = Vec::new();
    if low > 0 {
        roots.push(BigRational::zero());
    }

    let constant = to_small(&coeffs[low]);
    let leading = to_small(&coeffs[degree]);
    for p in divisors(constant) {
        for q in divisors(leading) {
            for sign in [1i128, -1] {
                let candidate = BigRational::new(BigInt::from(sign * p), BigInt::from(q));
                if eval_is_zero(poly, &candidate) && !roots.contains(&candidate) {
                    roots.push(candidate);
                }
            }
        }
    }
    Some(roots)
}

/// A rational point where the solution sets of `p` and `q` differ, if the
/// sets are not equal.  Used to exhibit, concretely, that two equations
/// say different things.
pub fn distinguishing_point(p: &Poly, q: &Poly) -> Option<BigRational> {
    match (rational_roots(p), rational_roots(q)) {
        (None, None) => None,
        (None, Some(_)) => Some(non_root(q)),
        (Some(_), None) => Some(non_root(p)),
        (Some(rp), Some(rq)) => rp
            .iter()
            .find(|r| !eval_is_zero(q, r))
            .or_else(|| rq.iter().find(|r| !eval_is_zero(p, r)))
            .cloned(),
    }
}

fn eval_is_zero(poly: &Poly, x: &BigRational) -> bool {
    poly.eval(x).is_zero()
}

/// Some rational that is not a root; a finite root set cannot cover the
/// integers.
fn non_root(poly: &Poly) -> BigRational {
    (0i64..)
        .map(|k| BigRational::from_integer(BigInt::from(k)))
        .find(|x| !eval_is_zero(poly, x))
        .expect("a non-root integer exists")
}

fn to_small(n: &BigInt) -> i128 {
    i128::try_from(n.abs()).expect("coefficient too large for rational root search")
}

fn divisors(n: i128) -> Vec<i128> {
    let n = n.abs();
    assert!(n > 0, "divisors of zero requested");
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            out.push(n / d);
        }
        d += 1;
    }
    out.sort_unstable();
    out.dedup();
    out
}
