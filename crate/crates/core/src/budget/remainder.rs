use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{project_low, CutoffProfile, Field};

fn outer_sym_check<T: Scalar>(f: &Field<T>, g: &Field<T>) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Bilinear remainder `(f g)_{<=Q} - f_{<=Q} g - f g_{<=Q} + f g`, the
/// increment form `int h~_Q(y) (f(x-y)-f(x)) (g(x-y)-g(x)) dy` expanded into
/// Fourier multipliers. Vector arguments give the outer product `f_i g_j`.
pub fn remainder<T: Scalar>(f: &Field<T>, g: &Field<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    outer_sym_check(f, g)?;
    let fg = f.outer(g)?;
    let f_low = project_low(f, q, cutoff)?;
    let g_low = project_low(g, q, cutoff)?;
    project_low(&fg, q, cutoff)?
        .sub(&f_low.outer(g)?)?
        .sub(&f.outer(&g_low)?)?
        .add(&fg)
}

/// Trilinear remainder `r_Q(rho, u, u)` with components `i * d + j`.
pub fn remainder3<T: Scalar>(rho: &Field<T>, u: &Field<T>, q: i32, cutoff: &CutoffProfile) -> Result<Field<T>> {
    outer_sym_check(rho, u)?;
    if rho.ncomp() != 1 {
        return Err(Error::ComponentMismatch("remainder3 needs a scalar first argument".into()));
    }
    let low = |f: &Field<T>| project_low(f, q, cutoff);
    let m = u.mul_scalar_field(rho)?;
    let uu = u.outer(u)?;
    let rho_uu = uu.mul_scalar_field(rho)?;
    let m_low = low(&m)?;
    let u_low = low(u)?;
    low(&rho_uu)?
        .sub(&m_low.outer(u)?)?
        .sub(&u.outer(&m_low)?)?
        .add(&uu.mul_scalar_field(&low(rho)?)?)?
        .sub(&low(&uu)?.mul_scalar_field(rho)?)?
        .add(&u_low.outer(u)?.mul_scalar_field(rho)?)?
        .add(&u.outer(&u_low)?.mul_scalar_field(rho)?)?
        .sub(&rho_uu)
}
