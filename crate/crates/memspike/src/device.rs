//! Discrete-time model of one spiking memristor.
//!
//! The device carries two internal state variables on top of its DC
//! conduction: an accommodation voltage `u` that relaxes toward the applied
//! level with time constant `tau_u` (the short-term memory), and a transient
//! current amplitude `s` that decays with time constant `tau_s`. A change of
//! the applied level replaces the live transient with `kappa * (v_new - u)`,
//! so the size and sign of a spike depend on how far the memory has
//! accommodated to the previous level. The measured current is
//! `g_dc * v + s` plus Gaussian noise from a per-device seeded generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// How long the terminal is held at 0 V to erase the short-term memory, seconds.
pub const DEFAULT_ZERO_HOLD: f64 = 4.0;

/// Physical constants of the device model.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Spike gain, amperes per volt of effective voltage change.
    pub kappa: f64,
    /// Accommodation (short-term memory) time constant, seconds.
    pub tau_u: f64,
    /// Transient decay time constant, seconds.
    pub tau_s: f64,
    /// DC conductance, siemens.
    pub g_dc: f64,
    /// Gaussian current-noise standard deviation, amperes. Zero disables noise.
    pub noise_sigma: f64,
    /// Zeroing hold duration, seconds.
    pub zero_hold: f64,
    /// Largest accommodation residual tolerated after zeroing, volts.
    pub eps_u: f64,
    /// Largest transient residual tolerated after zeroing, amperes.
    pub eps_s: f64,
    /// Largest source level the device accepts, volts.
    pub v_compliance: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            kappa: 2.0e-7,
            tau_u: 0.02,
            tau_s: 0.007,
            g_dc: 1.0e-7,
            noise_sigma: 2.0e-10,
            zero_hold: DEFAULT_ZERO_HOLD,
            eps_u: 1.0e-6,
            eps_s: 1.0e-12,
            v_compliance: 10.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 6] = [
            ("kappa", self.kappa),
            ("tau_u", self.tau_u),
            ("tau_s", self.tau_s),
            ("zero_hold", self.zero_hold),
            ("eps_u", self.eps_u),
            ("eps_s", self.eps_s),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        let non_negative = [("g_dc", self.g_dc), ("noise_sigma", self.noise_sigma)];
        for (name, value) in non_negative {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be non-negative and finite",
                });
            }
        }
        if !self.v_compliance.is_finite() || self.v_compliance <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "v_compliance",
                value: self.v_compliance,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }

    /// Same parameters with measurement noise disabled.
    pub fn without_noise(mut self) -> Self {
        self.noise_sigma = 0.0;
        self
    }
}

/// One memristor: params, dynamical state and a seeded noise source.
#[derive(Debug, Clone)]
pub struct Device {
    params: DeviceParams,
    seed: u64,
    /// Accommodation voltage, volts.
    u: f64,
    /// Transient current amplitude, amperes.
    s: f64,
    /// Currently held source voltage, volts.
    v_applied: f64,
    /// Simulation clock, seconds.
    t: f64,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl Device {
    pub fn new(params: DeviceParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let noise = if params.noise_sigma > 0.0 {
            Some(Normal::new(0.0, params.noise_sigma).expect("validated sigma"))
        } else {
            None
        };
        Ok(Device {
            params,
            seed,
            u: 0.0,
            s: 0.0,
            v_applied: 0.0,
            t: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
        })
    }

    /// Relax the state over `dt` seconds with the applied level held constant.
    ///
    /// `u` moves toward the applied voltage by `1 - exp(-dt/tau_u)` of the
    /// remaining gap; `s` decays by `exp(-dt/tau_s)`. No noise enters the state.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::NonPositiveStep(dt));
        }
        self.u += (self.v_applied - self.u) * (1.0 - (-dt / self.params.tau_u).exp());
        self.s *= (-dt / self.params.tau_s).exp();
        self.t += dt;
        Ok(())
    }

    /// Drive the source to `v_new` at the current instant.
    ///
    /// A changed level replaces the live transient with `kappa * (v_new - u)`;
    /// re-applying the held level leaves the transient untouched.
    pub fn apply_voltage(&mut self, v_new: f64) -> Result<()> {
        if !v_new.is_finite() || v_new.abs() > self.params.v_compliance {
            return Err(Error::ComplianceExceeded {
                level: v_new,
                limit: self.params.v_compliance,
            });
        }
        // Exact comparison on purpose: levels are programmed values, not
        // computed quantities, and equal consecutive levels must not spike.
        if v_new != self.v_applied {
            self.s = self.params.kappa * (v_new - self.u);
        }
        self.v_applied = v_new;
        Ok(())
    }

    /// Measure the current at this instant: `g_dc * v + s` plus noise.
    pub fn sample_current(&mut self) -> f64 {
        let mut current = self.params.g_dc * self.v_applied + self.s;
        if let Some(noise) = &self.noise {
            current += noise.sample(&mut self.rng);
        }
        current
    }

    /// Hold 0 V for `zero_hold` seconds, erasing the short-term memory.
    ///
    /// Fails with the residual magnitudes if the state did not settle below
    /// `eps_u` / `eps_s`, which only happens with pathological time constants.
    pub fn zero(&mut self) -> Result<()> {
        self.apply_voltage(0.0)?;
        self.advance(self.params.zero_hold)?;
        if self.u.abs() >= self.params.eps_u || self.s.abs() >= self.params.eps_s {
            return Err(Error::ZeroingFailed {
                residual_u: self.u.abs(),
                residual_s: self.s.abs(),
            });
        }
        Ok(())
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Accommodation voltage `u`, volts.
    pub fn accommodation(&self) -> f64 {
        self.u
    }

    /// Transient current amplitude `s`, amperes.
    pub fn transient(&self) -> f64 {
        self.s
    }

    /// Currently held source level, volts.
    pub fn level(&self) -> f64 {
        self.v_applied
    }

    /// Simulation clock, seconds.
    pub fn clock(&self) -> f64 {
        self.t
    }

    pub fn is_zeroed(&self) -> bool {
        self.u.abs() < self.params.eps_u && self.s.abs() < self.params.eps_s
    }

    /// A pristine device with the same parameters and a sub-seed derived
    /// from this device's seed and `index`. Used to run batches of
    /// independent, reproducible simulations.
    pub fn spawn(&self, index: u64) -> Device {
        Device::new(self.params.clone(), derive_seed(self.seed, index))
            .expect("params already validated")
    }
}

/// Deterministically mix a base seed and a task index into a sub-seed
/// (splitmix64 finalizer), so batch rows get independent noise streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const DT: f64 = 0.02;

    fn quiet() -> DeviceParams {
        DeviceParams::default().without_noise()
    }

    #[test]
    fn new_device_is_pristine() {
        let dev = Device::new(DeviceParams::default(), 42).unwrap();
        assert_eq!(dev.accommodation(), 0.0);
        assert_eq!(dev.transient(), 0.0);
        assert_eq!(dev.level(), 0.0);
        assert_eq!(dev.clock(), 0.0);
        assert!(dev.is_zeroed());
    }

    #[test]
    fn zero_time_constant_rejected() {
        let params = DeviceParams {
            tau_u: 0.0,
            ..DeviceParams::default()
        };
        assert!(matches!(
            Device::new(params, 42),
            Err(Error::InvalidParameter { name: "tau_u", .. })
        ));
    }

    #[test]
    fn advance_accommodates_toward_level() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.advance(DT).unwrap();
        // one step at tau_u: u = 0.2 * (1 - 1/e)
        assert_relative_eq!(
            dev.accommodation(),
            0.12642411176571153,
            max_relative = 1e-12
        );
    }

    #[test]
    fn advance_decays_transient() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        assert_relative_eq!(dev.transient(), 4.0e-8, max_relative = 1e-12);
        dev.advance(DT).unwrap();
        assert_relative_eq!(dev.transient(), 2.297304770704694e-9, max_relative = 1e-12);
    }

    #[test]
    fn accommodated_level_is_a_fixed_point() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.1).unwrap();
        dev.advance(1000.0).unwrap();
        let u = dev.accommodation();
        assert_relative_eq!(u, 0.1, max_relative = 1e-9);
        dev.advance(DT).unwrap();
        assert_eq!(dev.accommodation(), u);
    }

    #[test]
    fn non_positive_dt_rejected() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        assert!(matches!(dev.advance(0.0), Err(Error::NonPositiveStep(_))));
        assert!(matches!(dev.advance(-1.0), Err(Error::NonPositiveStep(_))));
        assert!(matches!(
            dev.advance(f64::NAN),
            Err(Error::NonPositiveStep(_))
        ));
    }

    #[test]
    fn spike_from_rest_scales_with_level() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        assert_relative_eq!(dev.transient(), 4.0e-8, max_relative = 1e-12);
    }

    #[test]
    fn negative_spike_shrinks_with_partial_accommodation() {
        // dwell one step at 0.2 V, then step down to 0.01 V: the downward
        // spike is smaller in magnitude than the fully accommodated -3.8e-8.
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.advance(DT).unwrap();
        dev.apply_voltage(0.01).unwrap();
        assert_relative_eq!(
            dev.transient(),
            -2.3284822353142305e-8,
            max_relative = 1e-12
        );
        assert!(dev.transient().abs() < 3.8e-8);
    }

    #[test]
    fn reapplying_the_held_level_does_not_spike() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.advance(DT).unwrap();
        let s = dev.transient();
        dev.apply_voltage(0.2).unwrap();
        assert_eq!(dev.transient(), s);
    }

    #[test]
    fn sample_is_dc_plus_transient() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.1).unwrap();
        let i = dev.sample_current();
        assert_relative_eq!(i, 3.0e-8, max_relative = 1e-12);
        // zero input, zero output
        let mut rest = Device::new(quiet(), 0).unwrap();
        assert_eq!(rest.sample_current(), 0.0);
    }

    #[test]
    fn compliance_limit_rejected() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        assert!(matches!(
            dev.apply_voltage(10.5),
            Err(Error::ComplianceExceeded { .. })
        ));
        assert!(matches!(
            dev.apply_voltage(-10.5),
            Err(Error::ComplianceExceeded { .. })
        ));
        dev.apply_voltage(10.0).unwrap();
    }

    #[test]
    fn zeroing_settles_below_tolerances() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.advance(DT).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.zero().unwrap();
        assert!(dev.accommodation().abs() < 1.0e-6);
        assert!(dev.transient().abs() < 1.0e-12);
        assert!(dev.is_zeroed());
    }

    #[test]
    fn zeroing_is_idempotent() {
        let mut dev = Device::new(quiet(), 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.zero().unwrap();
        let (u, s) = (dev.accommodation(), dev.transient());
        dev.zero().unwrap();
        assert!((dev.accommodation() - u).abs() < 1e-6);
        assert!((dev.transient() - s).abs() < 1e-12);
    }

    #[test]
    fn zeroing_fails_for_pathological_time_constants() {
        let params = DeviceParams {
            tau_u: 100.0,
            ..quiet()
        };
        let mut dev = Device::new(params, 0).unwrap();
        dev.apply_voltage(0.2).unwrap();
        dev.advance(50.0).unwrap();
        assert!(matches!(dev.zero(), Err(Error::ZeroingFailed { .. })));
    }

    #[test]
    fn same_seed_same_noise_stream() {
        let mut a = Device::new(DeviceParams::default(), 42).unwrap();
        let mut b = Device::new(DeviceParams::default(), 42).unwrap();
        for _ in 0..16 {
            a.apply_voltage(0.1).unwrap();
            b.apply_voltage(0.1).unwrap();
            assert_eq!(a.sample_current(), b.sample_current());
            a.advance(DT).unwrap();
            b.advance(DT).unwrap();
        }
    }

    #[test]
    fn downward_spike_grows_with_dwell_time() {
        // longer dwell at +V means more accommodation, hence a larger
        // spike when stepping back to 0 V
        let mut last = 0.0;
        for steps in 1..8 {
            let mut dev = Device::new(quiet(), 0).unwrap();
            dev.apply_voltage(0.2).unwrap();
            for _ in 0..steps {
                dev.advance(DT).unwrap();
            }
            dev.apply_voltage(0.0).unwrap();
            let spike = dev.transient().abs();
            assert!(spike > last, "dwell {steps}: {spike} <= {last}");
            last = spike;
        }
    }

    #[test]
    fn spawned_devices_are_pristine_and_reproducible() {
        let mut parent = Device::new(DeviceParams::default(), 42).unwrap();
        parent.apply_voltage(0.2).unwrap();
        parent.advance(DT).unwrap();
        let mut a = parent.spawn(3);
        let mut b = parent.spawn(3);
        assert_eq!(a.accommodation(), 0.0);
        assert_eq!(a.clock(), 0.0);
        a.apply_voltage(0.1).unwrap();
        b.apply_voltage(0.1).unwrap();
        assert_eq!(a.sample_current(), b.sample_current());
        // a different index gets a different noise stream
        let mut c = parent.spawn(4);
        c.apply_voltage(0.1).unwrap();
        assert_ne!(b.spawn(3).seed(), c.seed());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        let c = derive_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        // deterministic
        assert_eq!(a, derive_seed(42, 0));
    }
}
