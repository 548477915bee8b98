use serde::{Deserialize, Serialize};

/// Kinetic and operational model constants.
///
/// Defaults are the published parameter set for this process; every value is
/// strictly positive. `gamma` and `alpha_smooth` shape the two smoothing
/// terms (glucose-inhibition sigmoid and smooth-maximum product inhibition)
/// and are carried here so sensitivity studies can vary them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParameters {
    /// Maximum specific growth rate μ_X,max [min⁻¹].
    pub mu_x_max: f64,
    /// Maximum specific death rate μ_D,max [min⁻¹].
    pub mu_d_max: f64,
    /// Maintenance-1 rate constant μ̄_m1 [min⁻¹].
    pub mu_m1_bar: f64,
    /// Maintenance-2 rate constant μ̄_m2 [min⁻¹].
    pub mu_m2_bar: f64,
    /// Lactate-production-2 rate constant μ̄_L,p2 [min⁻¹].
    pub mu_lp2_bar: f64,
    /// Growth temperature-activation constant K₁ [K].
    pub k1: f64,
    /// Death temperature-activation constant K₂ [K].
    pub k2: f64,
    /// Glucose half-saturation constant K_G [g/10⁹ cells].
    pub k_g: f64,
    /// Lactate inhibition constant KI_L [g/L].
    pub ki_l: f64,
    /// Product inhibition constant KI_P [L/g].
    pub ki_p: f64,
    /// Lactate threshold L_max,1 [g/L].
    pub l_max1: f64,
    /// Lactate threshold L_max,2 [g/L].
    pub l_max2: f64,
    /// Glucose-inhibition switching concentration c̄_G [g/L].
    pub c_g_bar: f64,
    /// Glucose consumed per cell division α_1,G [g/10⁹ cells].
    pub alpha_1g: f64,
    /// Product formed per cell division α_1,P [g/10⁹ cells].
    pub alpha_1p: f64,
    /// Glucose consumed by maintenance α_3,G [g/10⁹ cells].
    pub alpha_3g: f64,
    /// Product formed by maintenance α_3,P [g/10⁹ cells].
    pub alpha_3p: f64,
    /// Lactate from maintenance-2 α_4,L [g/10⁹ cells].
    pub alpha_4l: f64,
    /// Lactate from production-1 α_5,L [g/10⁹ cells].
    pub alpha_5l: f64,
    /// Lactate from production-2 α_6,L [g/10⁹ cells].
    pub alpha_6l: f64,
    /// Sigmoid steepness γ of the glucose-inhibition term [L/g].
    pub gamma: f64,
    /// Smooth-maximum sharpness ᾱ of the product-inhibition term [-].
    pub alpha_smooth: f64,
    /// Glucose concentration of the feed stream c_G,in [g/L].
    pub c_g_in: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        ModelParameters {
            mu_x_max: 0.153,
            mu_d_max: 3.955e-5,
            mu_m1_bar: 1.0,
            mu_m2_bar: 1.0,
            mu_lp2_bar: 1.0,
            k1: 1689.0,
            k2: 524.0,
            k_g: 0.85,
            ki_l: 344.0,
            ki_p: 0.688,
            l_max1: 628.0,
            l_max2: 0.5,
            c_g_bar: 7.5,
            alpha_1g: 0.4876,
            alpha_1p: 6.62e-8,
            alpha_3g: 1.102e-4,
            alpha_3p: 1.2e-5,
            alpha_4l: 1.89e-5,
            alpha_5l: 0.5504,
            alpha_6l: 1.0249e-5,
            gamma: 10.0,
            alpha_smooth: 100.0,
            c_g_in: 32.5,
        }
    }
}

impl ModelParameters {
    /// Checks that every constant is strictly positive.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("mu_x_max", self.mu_x_max),
            ("mu_d_max", self.mu_d_max),
            ("mu_m1_bar", self.mu_m1_bar),
            ("mu_m2_bar", self.mu_m2_bar),
            ("mu_lp2_bar", self.mu_lp2_bar),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k_g", self.k_g),
            ("ki_l", self.ki_l),
            ("ki_p", self.ki_p),
            ("l_max1", self.l_max1),
            ("l_max2", self.l_max2),
            ("c_g_bar", self.c_g_bar),
            ("alpha_1g", self.alpha_1g),
            ("alpha_1p", self.alpha_1p),
            ("alpha_3g", self.alpha_3g),
            ("alpha_3p", self.alpha_3p),
            ("alpha_4l", self.alpha_4l),
            ("alpha_5l", self.alpha_5l),
            ("alpha_6l", self.alpha_6l),
            ("gamma", self.gamma),
            ("alpha_smooth", self.alpha_smooth),
            ("c_g_in", self.c_g_in),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("model parameter {name} must be positive, got {value}"));
            }
        }
        Ok(())
    }
}
