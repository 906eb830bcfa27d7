//! Scalar abstraction so the channel recursion can run in native f64 or in
//! extended precision (astro-float big floats) through one code path.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

/// Minimal real-arithmetic surface needed by the recursion.
pub trait Scalar: Clone {
    type Ctx;

    fn from_f64(x: f64, ctx: &mut Self::Ctx) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn sub(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn mul(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn div(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn neg(&self) -> Self;
    fn sqrt(&self, ctx: &mut Self::Ctx) -> Self;
    fn exp(&self, ctx: &mut Self::Ctx) -> Self;
    fn cos(&self, ctx: &mut Self::Ctx) -> Self;
    fn sin(&self, ctx: &mut Self::Ctx) -> Self;
    fn pi(ctx: &mut Self::Ctx) -> Self;
    fn abs(&self) -> Self;
    fn is_finite_val(&self) -> bool;
}

impl Scalar for f64 {
    type Ctx = ();

    #[inline]
    fn from_f64(x: f64, _: &mut ()) -> f64 {
        x
    }
    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn add(&self, o: &f64, _: &mut ()) -> f64 {
        self + o
    }
    #[inline]
    fn sub(&self, o: &f64, _: &mut ()) -> f64 {
        self - o
    }
    #[inline]
    fn mul(&self, o: &f64, _: &mut ()) -> f64 {
        self * o
    }
    #[inline]
    fn div(&self, o: &f64, _: &mut ()) -> f64 {
        self / o
    }
    #[inline]
    fn neg(&self) -> f64 {
        -self
    }
    #[inline]
    fn sqrt(&self, _: &mut ()) -> f64 {
        f64::sqrt(*self)
    }
    #[inline]
    fn exp(&self, _: &mut ()) -> f64 {
        f64::exp(*self)
    }
    #[inline]
    fn cos(&self, _: &mut ()) -> f64 {
        f64::cos(*self)
    }
    #[inline]
    fn sin(&self, _: &mut ()) -> f64 {
        f64::sin(*self)
    }
    #[inline]
    fn pi(_: &mut ()) -> f64 {
        std::f64::consts::PI
    }
    #[inline]
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    #[inline]
    fn is_finite_val(&self) -> bool {
        self.is_finite()
    }
}

/// Context for extended-precision evaluation: target precision in bits plus
/// the shared constants cache (π, trig tables).
pub struct BigCtx {
    pub precision: usize,
    rm: RoundingMode,
    consts: Consts,
}

impl BigCtx {
    pub fn new(precision_bits: usize) -> Self {
        BigCtx {
            precision: precision_bits,
            rm: RoundingMode::ToEven,
            consts: Consts::new().expect("constants cache"),
        }
    }
}

/// Extended-precision real backed by astro-float.
#[derive(Clone, Debug)]
pub struct BigReal(pub BigFloat);

/// astro-float exposes no public conversion back to f64; assemble one from
/// the raw mantissa words and binary exponent (round-to-nearest is not
/// needed here, truncation of bits below 2^-128 is far under f64 resolution).
pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let (words, _p, sign, exp, _inexact) = x.as_raw_parts().expect("finite raw parts");
    let top = words[words.len() - 1];
    let next = if words.len() > 1 {
        words[words.len() - 2]
    } else {
        0
    };
    let frac = (top as f64) / 2f64.powi(64) + (next as f64) / 2f64.powi(128);
    let v = frac * 2f64.powi(exp);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

impl Scalar for BigReal {
    type Ctx = BigCtx;

    fn from_f64(x: f64, ctx: &mut BigCtx) -> Self {
        BigReal(BigFloat::from_f64(x, ctx.precision))
    }
    fn to_f64(&self) -> f64 {
        bigfloat_to_f64(&self.0)
    }
    fn add(&self, o: &Self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.add(&o.0, ctx.precision, ctx.rm))
    }
    fn sub(&self, o: &Self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.sub(&o.0, ctx.precision, ctx.rm))
    }
    fn mul(&self, o: &Self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.mul(&o.0, ctx.precision, ctx.rm))
    }
    fn div(&self, o: &Self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.div(&o.0, ctx.precision, ctx.rm))
    }
    fn neg(&self) -> Self {
        BigReal(self.0.neg())
    }
    fn sqrt(&self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.sqrt(ctx.precision, ctx.rm))
    }
    fn exp(&self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.exp(ctx.precision, ctx.rm, &mut ctx.consts))
    }
    fn cos(&self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.cos(ctx.precision, ctx.rm, &mut ctx.consts))
    }
    fn sin(&self, ctx: &mut BigCtx) -> Self {
        BigReal(self.0.sin(ctx.precision, ctx.rm, &mut ctx.consts))
    }
    fn pi(ctx: &mut BigCtx) -> Self {
        BigReal(ctx.consts.pi(ctx.precision, ctx.rm))
    }
    fn abs(&self) -> Self {
        BigReal(self.0.abs())
    }
    fn is_finite_val(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn f64_roundtrip_through_bigfloat() {
        let mut ctx = BigCtx::new(256);
        for v in [1.0, -0.5, 3.141592653589793, 1e-300, -2.5e17, 0.1] {
            let b = BigReal::from_f64(v, &mut ctx);
            assert_eq!(b.to_f64(), v);
        }
    }

    #[test]
    fn big_arithmetic_matches_f64() {
        let mut ctx = BigCtx::new(256);
        let a = BigReal::from_f64(1.7, &mut ctx);
        let b = BigReal::from_f64(0.3, &mut ctx);
        assert_relative_eq!(
            a.mul(&b, &mut ctx).to_f64(),
            1.7 * 0.3,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            a.sqrt(&mut ctx).to_f64(),
            1.7f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            a.cos(&mut ctx).to_f64(),
            1.7f64.cos(),
            max_relative = 1e-15
        );
        let pi = <BigReal as Scalar>::pi(&mut ctx);
        assert_relative_eq!(pi.to_f64(), std::f64::consts::PI, max_relative = 1e-15);
    }

    #[test]
    fn big_exp_small_argument() {
        let mut ctx = BigCtx::new(256);
        let x = BigReal::from_f64(-700.0, &mut ctx);
        let e = x.exp(&mut ctx).to_f64();
        assert_relative_eq!(e, (-700.0f64).exp(), max_relative = 1e-12);
        // far below f64 range: conversion underflows to zero, big value stays finite
        let y = BigReal::from_f64(-1500.0, &mut ctx);
        let ey = y.exp(&mut ctx);
        assert!(ey.is_finite_val());
        assert_eq!(ey.to_f64(), 0.0);
    }
}
