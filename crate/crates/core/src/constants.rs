//! Physical constants in SI units.

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Impedance of free space (ohm).
pub const ETA0: f64 = 376.730_313_668;

/// Free-space wavenumber for a frequency in Hz.
pub fn wavenumber(freq_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * freq_hz / C0
}
