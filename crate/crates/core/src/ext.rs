//! Extended-real arithmetic on `f64`.
//!
//! Conjugacy formulas occasionally mix finite values with `±∞` (weight
//! sequences are allowed to take infinite values). IEEE arithmetic already
//! does the right thing except for `(+∞) + (−∞)`, which is where the lower
//! and upper addition conventions differ: lower addition resolves the clash
//! to `−∞`, upper addition to `+∞`. Everything in this crate funnels through
//! these two helpers so the convention is applied in exactly one place.

/// Lower (inf-biased) addition: `(+∞) + (−∞) = −∞`.
pub fn lower_add(a: f64, b: f64) -> f64 {
    if (a == f64::INFINITY && b == f64::NEG_INFINITY)
        || (a == f64::NEG_INFINITY && b == f64::INFINITY)
    {
        f64::NEG_INFINITY
    } else {
        a + b
    }
}

/// Upper (sup-biased) addition: `(+∞) + (−∞) = +∞`.
pub fn upper_add(a: f64, b: f64) -> f64 {
    if (a == f64::INFINITY && b == f64::NEG_INFINITY)
        || (a == f64::NEG_INFINITY && b == f64::INFINITY)
    {
        f64::INFINITY
    } else {
        a + b
    }
}

/// Lower subtraction `a ∸ b = a ⊕ (−b)` with the lower-addition convention.
pub fn lower_sub(a: f64, b: f64) -> f64 {
    lower_add(a, -b)
}
