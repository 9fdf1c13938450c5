//! Decibel conversions and thermal noise.

/// Boltzmann constant, exact SI value (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Receiver noise power `10 log10(k T B) + NF` in dBm, returned in watts.
///
/// `k T B` is in watts, hence the factor 1000 to land in milliwatts before
/// taking the log.
pub fn noise_power(temperature_k: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    let ktb_dbm = 10.0 * (BOLTZMANN * temperature_k * bandwidth_hz * 1000.0).log10();
    dbm_to_watt(ktb_dbm + noise_figure_db)
}

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}
