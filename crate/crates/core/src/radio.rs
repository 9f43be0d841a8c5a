//! Link budget, channel draws, MRT gain, per-pRB SNR and rates.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// UMa line-of-sight path loss below the breakpoint. Distances under 1 m are
/// clamped; the flag reports the clamp.
pub fn path_loss_db(d3d_m: f64, fc_ghz: f64) -> (f64, bool) {
    let clamped = d3d_m < 1.0;
    let d = d3d_m.max(1.0);
    (28.0 + 22.0 * d.log10() + 20.0 * fc_ghz.log10(), clamped)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub prb_width_hz: f64,
    pub noise_psd_dbm_hz: f64,
}

impl LinkBudget {
    pub fn access_point(cfg: &SimConfig) -> Self {
        Self {
            tx_power_dbm: cfg.ap_tx_power_dbm,
            tx_gain_dbi: cfg.tx_gain_dbi,
            rx_gain_dbi: cfg.rx_gain_dbi,
            noise_figure_db: cfg.noise_figure_db,
            prb_width_hz: cfg.prb_width_hz,
            noise_psd_dbm_hz: cfg.noise_psd_dbm_hz,
        }
    }

    pub fn base_station(cfg: &SimConfig) -> Self {
        Self { tx_power_dbm: cfg.nc_tx_power_dbm, ..Self::access_point(cfg) }
    }

    /// Noise power over one pRB, in dBm.
    pub fn noise_dbm(&self) -> f64 {
        self.noise_psd_dbm_hz + 10.0 * self.prb_width_hz.log10() + self.noise_figure_db
    }

    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_dbm())
    }

    /// Effective transmit power including both antenna gains, in mW.
    pub fn effective_tx_mw(&self) -> f64 {
        db_to_linear(self.tx_power_dbm + self.tx_gain_dbi + self.rx_gain_dbi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub fast_fading: Vec<Complex64>,
    pub shadowing_db: f64,
    pub path_loss_db: f64,
}

fn draw_fading(rng: &mut SimRng, antennas: usize) -> Vec<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..antennas)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * scale, im * scale)
        })
        .collect()
}

fn draw_shadow(rng: &mut SimRng, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db).expect("finite sigma").sample(rng)
}

pub fn draw_channel(rng: &mut SimRng, antennas: usize, path_loss_db: f64, shadow_sigma_db: f64) -> LinkChannel {
    let shadowing_db = draw_shadow(rng, shadow_sigma_db);
    LinkChannel { fast_fading: draw_fading(rng, antennas), shadowing_db, path_loss_db }
}

/// Beamforming power gain of a maximal-ratio precoder, `|h|^2` times the
/// linear large-scale attenuation.
pub fn mrt_gain(channel: &LinkChannel) -> f64 {
    let norm_sq: f64 = channel.fast_fading.iter().map(Complex64::norm_sqr).sum();
    norm_sq * db_to_linear(-(channel.path_loss_db + channel.shadowing_db))
}

/// Gains of one slot for every (cv, transmitter, pRB).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub num_cvs: usize,
    pub num_tx: usize,
    pub num_prbs: usize,
    gains: Vec<f64>,
    pub clamped_links: usize,
}

impl ChannelTable {
    /// Draws shadowing once per (cv, transmitter) and i.i.d. fast fading per
    /// (cv, transmitter, pRB, antenna).
    pub fn draw(
        rng: &mut SimRng,
        cv_positions: &[(f64, f64)],
        transmitters: &[(f64, f64, f64)],
        cv_height: f64,
        num_prbs: usize,
        antennas: usize,
        fc_ghz: f64,
        shadow_sigma_db: f64,
    ) -> Self {
        let mut gains = Vec::with_capacity(cv_positions.len() * transmitters.len() * num_prbs);
        let mut clamped_links = 0;
        for &p in cv_positions {
            for &tx in transmitters {
                let (pl, clamped) = path_loss_db(crate::mobility::distance_3d(tx, p, cv_height), fc_ghz);
                clamped_links += clamped as usize;
                let shadowing_db = draw_shadow(rng, shadow_sigma_db);
                for _ in 0..num_prbs {
                    let ch = LinkChannel { fast_fading: draw_fading(rng, antennas), shadowing_db, path_loss_db: pl };
                    gains.push(mrt_gain(&ch));
                }
            }
        }
        Self { num_cvs: cv_positions.len(), num_tx: transmitters.len(), num_prbs, gains, clamped_links }
    }

    pub fn from_gains(num_cvs: usize, num_tx: usize, num_prbs: usize, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != num_cvs * num_tx * num_prbs {
            return Err(Error::Domain("gain table has the wrong size".into()));
        }
        Ok(Self { num_cvs, num_tx, num_prbs, gains, clamped_links: 0 })
    }

    pub fn gain(&self, cv: usize, tx: usize, prb: usize) -> f64 {
        self.gains[(cv * self.num_tx + tx) * self.num_prbs + prb]
    }
}

/// Per-pRB SNR of `cv` served by the virtual cell `vc`. The numerator adds the
/// received power of every VC AP holding the pRB; the noise adds over all VC
/// APs.
pub fn snr_per_prb(
    vc: &[usize],
    cv: usize,
    assignment: &[(usize, usize)],
    channels: &ChannelTable,
    budget: &LinkBudget,
) -> Result<Vec<f64>> {
    let mut signal = vec![0.0; channels.num_prbs];
    for &(ap, prb) in assignment {
        if !vc.contains(&ap) {
            return Err(Error::Contract(format!("AP {ap} is not part of the virtual cell")));
        }
        signal[prb] += budget.effective_tx_mw() * channels.gain(cv, ap, prb);
    }
    let noise = vc.len() as f64 * budget.noise_mw();
    Ok(signal.into_iter().map(|s| s / noise).collect())
}

pub fn rate_bps(snr: &[f64], prb_width_hz: f64) -> f64 {
    snr.iter().map(|&s| prb_width_hz * (1.0 + s).log2()).sum()
}

/// Bits transmissible in one slot, rounded down.
pub fn tx_bits(rate_bps: f64, tti_s: f64) -> u64 {
    (rate_bps * tti_s + 1e-9).floor() as u64
}

/// Single-transmitter SNR used by the rate matrix.
pub fn single_link_snr(gain: f64, budget: &LinkBudget) -> f64 {
    budget.effective_tx_mw() * gain / budget.noise_mw()
}
