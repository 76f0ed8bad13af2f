//! Float helpers that work with and without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cabs(z: crate::C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// Principal square root.
pub fn csqrt(z: crate::C64) -> crate::C64 {
    let r = cabs(z);
    let re = sqrt((r + z.re).max(0.0) / 2.0);
    let im = sqrt((r - z.re).max(0.0) / 2.0);
    crate::C64::new(re, if z.im < 0.0 { -im } else { im })
}
