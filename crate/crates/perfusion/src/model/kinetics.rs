//! Reaction kinetics: specific rates, the inhibition/limitation factors that
//! modulate them, and their analytic derivatives with respect to
//! concentrations and temperature (used by the forward sensitivity system).

use super::smooth::{logistic, smooth_max_zero, smooth_max_zero_derivative};
use super::{ComponentVector, ModelError, ModelParameters, Stoichiometry};

/// All rate quantities evaluated at one (c, T) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBundle {
    /// Glucose limitation `c_G / (K_G c_Xv + c_G)` ∈ [0, 1]; defined as 0 at
    /// the 0/0 point of a fully depleted reactor.
    pub f_lim: f64,
    /// Combined inhibition: lactate term × smooth-max product term × glucose
    /// inhibition. Bounded below by the smooth-max floor -0.2785/ᾱ times the
    /// (positive) lactate and glucose factors.
    pub f_inh: f64,
    /// Growth temperature activation `exp(-K₁/T)` ∈ (0, 1).
    pub f_temp: f64,
    /// Death temperature activation `exp(-K₂/T)` ∈ (0, 1).
    pub f_d_temp: f64,
    /// Glucose inhibition `1 - s_γ(c_G, c̄_G)` ∈ (0, 1).
    pub f_g_inh: f64,
    /// Specific growth rate μ_X [min⁻¹].
    pub mu_x: f64,
    /// Specific death rate μ_D [min⁻¹].
    pub mu_d: f64,
    /// Maintenance rates μ_m1, μ_m2 [min⁻¹].
    pub mu_m1: f64,
    pub mu_m2: f64,
    /// Lactate production rates μ_L,p1, μ_L,p2 [min⁻¹].
    pub mu_lp1: f64,
    pub mu_lp2: f64,
    /// Reaction rates r_i = μ_i c_Xv [per-litre mass/min], reactions 1-6.
    pub rates: [f64; 6],
    /// Production rates R = Sᵀ r per component.
    pub production: ComponentVector,
}

/// Derivatives of the reaction-rate vector: `d_conc[i][j] = ∂r_i/∂c_j` and
/// `d_temp[i] = ∂r_i/∂T`.
#[derive(Debug, Clone, Copy)]
pub struct RateDerivatives {
    pub d_conc: [[f64; 5]; 6],
    pub d_temp: [f64; 6],
}

fn check_inputs(c: &ComponentVector, temperature: f64) -> Result<(), ModelError> {
    if !c.is_finite() {
        return Err(ModelError::NonFinite { quantity: "concentration" });
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(ModelError::NonFinite { quantity: "temperature" });
    }
    Ok(())
}

/// Evaluates the six reaction rates at concentrations `c` [10⁹ cells/L, g/L]
/// and temperature `T` [K].
///
/// The formulas are evaluated as written even for slightly negative
/// concentrations: an adaptive integrator may probe such points, and
/// clipping would destroy differentiability. Non-negativity is a matter for
/// path constraints and simulation warnings, not for the kinetics.
pub fn kinetics(c: &ComponentVector, temperature: f64, p: &ModelParameters) -> Result<RateBundle, ModelError> {
    check_inputs(c, temperature)?;
    Ok(eval(c, temperature, p, None).0)
}

/// As [`kinetics`], but also returns ∂r/∂c and ∂r/∂T.
pub fn kinetics_with_derivatives(
    c: &ComponentVector,
    temperature: f64,
    p: &ModelParameters,
) -> Result<(RateBundle, RateDerivatives), ModelError> {
    check_inputs(c, temperature)?;
    let mut derivs = RateDerivatives { d_conc: [[0.0; 5]; 6], d_temp: [0.0; 6] };
    let bundle = eval(c, temperature, p, Some(&mut derivs)).0;
    Ok((bundle, derivs))
}

fn eval(
    c: &ComponentVector,
    t_kelvin: f64,
    p: &ModelParameters,
    mut derivs: Option<&mut RateDerivatives>,
) -> (RateBundle, ()) {
    let (c_xv, c_g, c_l, c_p) = (c.viable_cells(), c.glucose(), c.lactate(), c.product());

    // Glucose limitation; the 0/0 point is the continuous limit along c_G → 0.
    let den = p.k_g * c_xv + c_g;
    let (f_lim, dflim_dg, dflim_dxv) = if den == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        let inv2 = 1.0 / (den * den);
        (c_g / den, p.k_g * c_xv * inv2, -p.k_g * c_g * inv2)
    };

    // Temperature activations.
    let f_temp = (-p.k1 / t_kelvin).exp();
    let f_d_temp = (-p.k2 / t_kelvin).exp();

    // Lactate factor and its slope.
    let h_l = p.ki_l / (p.ki_l + c_l);
    let dhl_dl = -p.ki_l / ((p.ki_l + c_l) * (p.ki_l + c_l));

    // Smooth-max product inhibition.
    let y = 1.0 - p.ki_p * c_p;
    let h_p = smooth_max_zero(y, p.alpha_smooth);
    let dhp_dp = -p.ki_p * smooth_max_zero_derivative(y, p.alpha_smooth);

    // Glucose inhibition 1 - s_γ(c_G, c̄_G), as σ(-t) to keep precision in
    // the deeply inhibited tail.
    let t_sig = p.gamma * (c_g - p.c_g_bar);
    let s = logistic(t_sig);
    let f_g_inh = logistic(-t_sig);
    let dfg_dg = -p.gamma * s * f_g_inh;

    let f_inh = h_l * h_p * f_g_inh;

    let q = p.mu_x_max * f_temp;
    let mu_x = q * f_lim * f_inh;
    let mu_d = p.mu_d_max * f_d_temp;
    let mu_m1 = p.mu_m1_bar;
    let mu_m2 = p.mu_m2_bar * (p.l_max2 - c_l) / p.l_max2;
    let beta = (p.l_max1 - c_l) / p.l_max1;
    let mu_lp1 = mu_x * beta;
    let mu_lp2 = p.mu_lp2_bar * beta;

    let rates = [
        mu_x * c_xv,
        mu_d * c_xv,
        mu_m1 * c_xv,
        mu_m2 * c_xv,
        mu_lp1 * c_xv,
        mu_lp2 * c_xv,
    ];
    let production = Stoichiometry::new(p).production_rates(&rates);

    if let Some(d) = derivs.as_deref_mut() {
        const XV: usize = 0;
        const G: usize = 2;
        const L: usize = 3;
        const P: usize = 4;

        let dmux_dxv = q * f_inh * dflim_dxv;
        let dmux_dg = q * (dflim_dg * f_inh + f_lim * h_l * h_p * dfg_dg);
        let dmux_dl = q * f_lim * dhl_dl * h_p * f_g_inh;
        let dmux_dp = q * f_lim * h_l * dhp_dp * f_g_inh;
        let dmux_dt = mu_x * p.k1 / (t_kelvin * t_kelvin);

        // r_1 = μ_X c_Xv
        d.d_conc[0][XV] = dmux_dxv * c_xv + mu_x;
        d.d_conc[0][G] = dmux_dg * c_xv;
        d.d_conc[0][L] = dmux_dl * c_xv;
        d.d_conc[0][P] = dmux_dp * c_xv;
        d.d_temp[0] = dmux_dt * c_xv;

        // r_2 = μ_D c_Xv
        d.d_conc[1][XV] = mu_d;
        d.d_temp[1] = mu_d * p.k2 / (t_kelvin * t_kelvin) * c_xv;

        // r_3 = μ̄_m1 c_Xv
        d.d_conc[2][XV] = mu_m1;

        // r_4 = μ̄_m2 (1 - c_L/L_max2) c_Xv
        d.d_conc[3][XV] = mu_m2;
        d.d_conc[3][L] = -p.mu_m2_bar / p.l_max2 * c_xv;

        // r_5 = μ_X β c_Xv,   β = 1 - c_L/L_max1
        d.d_conc[4][XV] = beta * (dmux_dxv * c_xv + mu_x);
        d.d_conc[4][G] = beta * dmux_dg * c_xv;
        d.d_conc[4][L] = c_xv * (beta * dmux_dl - mu_x / p.l_max1);
        d.d_conc[4][P] = beta * dmux_dp * c_xv;
        d.d_temp[4] = beta * dmux_dt * c_xv;

        // r_6 = μ̄_Lp2 β c_Xv
        d.d_conc[5][XV] = p.mu_lp2_bar * beta;
        d.d_conc[5][L] = -p.mu_lp2_bar / p.l_max1 * c_xv;
    }

    (
        RateBundle {
            f_lim,
            f_inh,
            f_temp,
            f_d_temp,
            f_g_inh,
            mu_x,
            mu_d,
            mu_m1,
            mu_m2,
            mu_lp1,
            mu_lp2,
            rates,
            production,
        },
        (),
    )
}
