"""Closed-loop link simulation: PHY, estimation, feedback, HARQ, metrics.

The physical layer (fading, radar pulses, noise, equalization, SINR
summaries) is simulated once per scenario in vectorized chunks, recording a
per-block trace; it does not depend on the feedback scheme, which only
selects the transported MCS. The causal loop then replays the trace per
scheme: PRI tracking, pilot-contamination detection, hybrid SINR assembly,
CSI window quantization with reporting delay, MCS selection, CRC draws and
asynchronous non-adaptive retransmissions.

Per-block data symbols are drawn for each supported modulation so the
scheme's MCS choice picks the matching what-if transmission over one common
channel, noise and interference realization.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import awgn, epa_fading, single_tap_fading
from .constellation import build_qam, nearest_lattice
from .detector import (NpiReference, PriTracker, detect_pilot_contamination)
from .errors import ConfigurationError, InputError
from .mcs import McsTable, bler_model, cqi_from_sinr, select_mcs_from_cqi
from .phy import GridGeometry, SINR_CEILING
from .radar import RadarConfig, pulse_train, re_interference_map

MODULATIONS = (4, 16, 64)
EESM_BETA = {4: 1.6, 16: 4.0, 64: 7.0}
SCHEME_IDS = {"min": 1, "median": 2, "max": 3, "dual": 4, "genie": 5}

# rng stream tags so solo and shared-trace runs draw identical numbers
_STREAM_FADING = 11
_STREAM_RADAR_LINK = 12
_STREAM_NOISE = 13
_STREAM_PULSE_PHASE = 14
_STREAM_T0 = 15
_STREAM_PILOTS = 16
_STREAM_DATA = {4: 21, 16: 22, 64: 23}
_STREAM_CRC = 31


@dataclass(frozen=True)
class ScenarioConfig:
    """One link-level scenario (times in the unit named by each field)."""

    snr_db: float = 19.5
    inr_db: float | None = 10.0     # per-RE interference-to-noise on the hit band
    sir_db: float | None = None     # alternative: per-RE signal-to-interference
    duration_blocks: int = 3000
    seed: int = 0
    # grid
    n_subcarriers: int = 600
    n_symbols: int = 14
    k_rb: int = 12
    # channel
    doppler_hz: float = 10.0
    channel_profile: str = "epa"    # epa | flat
    radar_link: str = "rayleigh"    # rayleigh | static
    # radar
    t_rep_ms: float = 3.125
    t_pul_us: float = 5.0
    f_sweep_mhz: float = 5.0
    delta_f_r_hz: float = 0.0
    radar_t0_ms: float | None = None   # None draws uniformly in [0, t_rep)
    radar_phase_mode: str = "random"
    # link adaptation / feedback
    scheme: str = "dual"            # min | median | max | dual
    estimator: str = "hybrid"       # pilot | hybrid | true
    t_csi_blocks: int = 10
    csi_delay_blocks: int = 8
    wideband_mode: str = "eesm"     # eesm | average
    use_reconstruction: bool = True
    harq_max_retx: int = 4
    tau_wait_ms: float = 8.0
    target_bler: float = 0.1
    # detection
    pri_window: int = 500
    pri_threshold: float = 6.0
    gamma_th_db: float = 1.0
    power_series: str = "residual"  # residual | total
    warmup_blocks: int | None = None

    def __post_init__(self):
        if self.csi_delay_blocks < 0 or self.t_csi_blocks < 1:
            raise ConfigurationError("CSI delays and windows must be nonnegative")
        if self.duration_blocks < self.t_csi_blocks:
            raise ConfigurationError("duration must cover at least one CSI window")
        if self.scheme not in ("min", "median", "max", "dual"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if self.estimator not in ("pilot", "hybrid", "true"):
            raise ConfigurationError(f"unknown estimator {self.estimator!r}")
        if self.radar_on and (self.inr_db is None) == (self.sir_db is None):
            raise ConfigurationError("set exactly one of inr_db / sir_db when radar is on")
        if self.scheme == "dual" and self.estimator == "pilot":
            warnings.warn("dual feedback with the pilot-only estimator cannot "
                          "classify impaired blocks reliably", stacklevel=2)

    @property
    def radar_on(self) -> bool:
        return self.inr_db is not None or self.sir_db is not None

    @property
    def block_duration(self) -> float:
        return GridGeometry(self.n_subcarriers, self.n_symbols).block_duration

    @property
    def warmup(self) -> int:
        if self.warmup_blocks is not None:
            return self.warmup_blocks
        if not self.radar_on:
            return min(self.duration_blocks // 3, 2 * self.t_csi_blocks + self.csi_delay_blocks + 10)
        return min(self.duration_blocks // 2, self.pri_window + 100)


@dataclass
class BlockTrace:
    """Per-block PHY summaries shared by every feedback scheme."""

    cfg: ScenarioConfig
    geom: GridGeometry
    n_data_per_symbol: np.ndarray       # (S,)
    sigma_w2: float
    sigma_hat2: np.ndarray              # (B,) pilot-residual noise estimate
    s_lin: np.ndarray                   # (B, S) pilot-SINR sums over data REs
    s_exp: np.ndarray                   # (B, S, n_mod) sums of exp(-g/beta_mod)
    t_lin: np.ndarray                   # (B, S) true-SINR sums
    t_exp: np.ndarray                   # (B, S, n_mod)
    r_avg: np.ndarray                   # (B, n_mod) reconstruction wideband (avg)
    r_eesm: np.ndarray                  # (B, n_mod)
    det_syms: np.ndarray                # (B, n_mod, 2) top score symbol indices
    h_lin: np.ndarray                   # (B, n_mod, 2) heuristic sums at det_syms
    h_exp: np.ndarray                   # (B, n_mod, 2)
    res_pow: np.ndarray                 # (B, n_mod) residual power series
    rx_pow: np.ndarray                  # (B, n_mod) total received power
    true_sym: np.ndarray                # (B,) hit symbol index or -1
    pulse_in_block: np.ndarray          # (B,) pulses whose center lies in the block

    @property
    def n_blocks(self) -> int:
        return len(self.sigma_hat2)

    @property
    def n_data_re(self) -> int:
        return int(self.n_data_per_symbol.sum())

    # wideband summaries -----------------------------------------------------
    def pilot_wideband(self, b: int, mod_idx: int, mode: str) -> float:
        if mode == "average":
            return float(self.s_lin[b].sum() / self.n_data_re)
        beta = EESM_BETA[MODULATIONS[mod_idx]]
        return float(-beta * math.log(self.s_exp[b, :, mod_idx].sum() / self.n_data_re))

    def true_wideband(self, b: int, mod_idx: int, mode: str) -> float:
        if mode == "average":
            return float(self.t_lin[b].sum() / self.n_data_re)
        beta = EESM_BETA[MODULATIONS[mod_idx]]
        return float(-beta * math.log(self.t_exp[b, :, mod_idx].sum() / self.n_data_re))

    def hybrid_wideband(self, b: int, mod_idx: int, mode: str, count: int = 1) -> float:
        """Pilot-aided everywhere except the detected symbols' heuristic values."""
        count = max(1, min(count, self.det_syms.shape[-1]))
        syms = self.det_syms[b, mod_idx, :count].astype(int)
        if mode == "average":
            total = self.s_lin[b].sum() - self.s_lin[b, syms].sum() + self.h_lin[b, mod_idx, :count].sum()
            return float(total / self.n_data_re)
        beta = EESM_BETA[MODULATIONS[mod_idx]]
        total = (self.s_exp[b, :, mod_idx].sum() - self.s_exp[b, syms, mod_idx].sum()
                 + self.h_exp[b, mod_idx, :count].sum())
        return float(-beta * math.log(total / self.n_data_re))


def _interference_scale(cfg: ScenarioConfig, geom: GridGeometry, sigma_w2: float,
                        radar_cfg: RadarConfig) -> float:
    """Amplitude scale making the hit-band per-RE interference power match the
    configured INR (relative to noise) or SIR (relative to unit signal).

    Reference: a unit-power pulse centered in a symbol's useful window; the
    band is the sweep width around the radar carrier offset.
    """
    from .radar import PulseTrain

    starts = geom.useful_start_times()
    arrival = starts[2] + geom.t_useful / 2
    ref = re_interference_map(PulseTrain(np.array([arrival]), np.array([0.0])),
                              geom, replace(radar_cfg, p_rad=1.0))
    band = np.abs(geom.subcarrier_freqs - cfg.delta_f_r_hz) <= cfg.f_sweep_mhz * 1e6 / 2
    ref_power = float(np.mean(np.abs(ref[2, band]) ** 2))
    if cfg.inr_db is not None:
        target = 10.0 ** (cfg.inr_db / 10.0) * sigma_w2
    else:
        target = 10.0 ** (-cfg.sir_db / 10.0)
    return math.sqrt(target / ref_power)


def simulate_phy(cfg: ScenarioConfig, chunk_blocks: int = 250) -> BlockTrace:
    """Simulate the physical layer and record per-block summaries."""
    geom = GridGeometry(cfg.n_subcarriers, cfg.n_symbols)
    n_mod = len(MODULATIONS)
    consts = {m: build_qam(m) for m in MODULATIONS}
    betas = np.array([EESM_BETA[m] for m in MODULATIONS])
    sigma_w2 = 10.0 ** (-cfg.snr_db / 10.0)

    fading = (epa_fading(cfg.doppler_hz, seed=[cfg.seed, _STREAM_FADING])
              if cfg.channel_profile == "epa"
              else single_tap_fading(cfg.doppler_hz, seed=[cfg.seed, _STREAM_FADING]))
    radar_fading = single_tap_fading(cfg.doppler_hz, seed=[cfg.seed, _STREAM_RADAR_LINK])

    pilot_rng = np.random.default_rng([cfg.seed, _STREAM_PILOTS])
    mask = geom.pilot_mask()
    pilots = np.exp(2j * math.pi * pilot_rng.random(int(mask.sum())))
    data_mask = ~mask
    n_data_sym = data_mask.sum(axis=1)

    # radar timeline over the whole run
    horizon = cfg.duration_blocks * geom.block_duration
    if cfg.radar_on:
        t0_rng = np.random.default_rng([cfg.seed, _STREAM_T0])
        t_rep = cfg.t_rep_ms * 1e-3
        t0 = (t0_rng.uniform(0.0, t_rep) if cfg.radar_t0_ms is None
              else cfg.radar_t0_ms * 1e-3)
        radar_cfg = RadarConfig(p_rad=1.0, t_pul=cfg.t_pul_us * 1e-6,
                                f_s=cfg.f_sweep_mhz * 1e6,
                                delta_f_r=cfg.delta_f_r_hz, t_rep=t_rep, t0=t0)
        train = pulse_train(radar_cfg, horizon,
                            rng=np.random.default_rng([cfg.seed, _STREAM_PULSE_PHASE]),
                            phase_mode=cfg.radar_phase_mode)
        amp = _interference_scale(cfg, geom, sigma_w2, radar_cfg)
    else:
        radar_cfg = None
        train = None
        amp = 0.0

    B = cfg.duration_blocks
    S = geom.n_symbols
    K = geom.n_subcarriers
    tr = BlockTrace(
        cfg=cfg, geom=geom, n_data_per_symbol=n_data_sym, sigma_w2=sigma_w2,
        sigma_hat2=np.zeros(B), s_lin=np.zeros((B, S)), s_exp=np.zeros((B, S, n_mod)),
        t_lin=np.zeros((B, S)), t_exp=np.zeros((B, S, n_mod)),
        r_avg=np.zeros((B, n_mod)), r_eesm=np.zeros((B, n_mod)),
        det_syms=np.zeros((B, n_mod, 2), dtype=int), h_lin=np.zeros((B, n_mod, 2)),
        h_exp=np.zeros((B, n_mod, 2)), res_pow=np.zeros((B, n_mod)),
        rx_pow=np.zeros((B, n_mod)), true_sym=np.full(B, -1, dtype=int),
        pulse_in_block=np.zeros(B, dtype=int))

    noise_rng = np.random.default_rng([cfg.seed, _STREAM_NOISE])
    data_rngs = {m: np.random.default_rng([cfg.seed, _STREAM_DATA[m]]) for m in MODULATIONS}
    rel_starts = geom.useful_start_times()
    np_syms = np.flatnonzero(n_data_sym == K)            # non-pilot symbol indices
    bd = geom.block_duration

    for c0 in range(0, B, chunk_blocks):
        c1 = min(c0 + chunk_blocks, B)
        C = c1 - c0
        t_blocks = np.arange(c0, c1) * bd
        times = (t_blocks[:, None] + rel_starts[None, :]).ravel()
        h = fading.frequency_response(times, geom.subcarrier_freqs).reshape(C, S, K)
        if cfg.radar_link == "rayleigh":
            h_r = radar_fading.tap_gains(times).reshape(C, S)
        else:
            h_r = np.ones((C, S), dtype=complex)

        imap = np.zeros((C, S, K), dtype=complex)
        if cfg.radar_on:
            lo = np.searchsorted(train.arrivals, t_blocks[0] - radar_cfg.t_pul)
            hi = np.searchsorted(train.arrivals, t_blocks[-1] + bd + radar_cfg.t_pul)
            for arr, ph in zip(train.arrivals[lo:hi], train.phases[lo:hi]):
                b_rel = int(math.floor(arr / bd)) - c0
                for bb in (b_rel - 1, b_rel, b_rel + 1):
                    if 0 <= bb < C:
                        from .radar import PulseTrain
                        sub = PulseTrain(np.array([arr - (c0 + bb) * bd]), np.array([ph]))
                        imap[bb] += re_interference_map(sub, geom, radar_cfg)
                if 0 <= b_rel < C:
                    tr.pulse_in_block[c0 + b_rel] += 1
            imap *= amp

        w = awgn((C, S, K), sigma_w2, noise_rng)
        common = h_r[:, :, None] * imap + w               # interference + noise

        # pilot-residual noise estimate (shared by every modulation)
        zp = h[:, mask] * pilots[None, :] + common[:, mask]
        resid = zp / pilots[None, :] - h[:, mask]
        sig_hat = np.mean(np.abs(resid) ** 2, axis=1)
        tr.sigma_hat2[c0:c1] = sig_hat

        g = np.conj(h) / (np.abs(h) ** 2 + sig_hat[:, None, None])
        gamma_p = np.abs(h) ** 2 / sig_hat[:, None, None]
        np.minimum(gamma_p, SINR_CEILING, out=gamma_p)
        true_den = np.abs(h_r[:, :, None] * imap) ** 2 + sigma_w2
        gamma_t = np.minimum(np.abs(h) ** 2 / true_den, SINR_CEILING)

        dm = data_mask[None, :, :]
        tr.s_lin[c0:c1] = np.where(dm, gamma_p, 0.0).sum(axis=2)
        tr.t_lin[c0:c1] = np.where(dm, gamma_t, 0.0).sum(axis=2)
        for mi, beta in enumerate(betas):
            tr.s_exp[c0:c1, :, mi] = np.where(dm, np.exp(-gamma_p / beta), 0.0).sum(axis=2)
            tr.t_exp[c0:c1, :, mi] = np.where(dm, np.exp(-gamma_t / beta), 0.0).sum(axis=2)

        e_sym = np.abs(imap) ** 2 @ np.ones(K)
        hit = e_sym.sum(axis=1) > 0
        tr.true_sym[c0:c1] = np.where(hit, np.argmax(e_sym, axis=1), -1)

        for mi, mod in enumerate(MODULATIONS):
            const = consts[mod]
            x = const.points[data_rngs[mod].integers(0, mod, (C, S, K))]
            x[:, mask] = pilots[None, :]
            z = h * x + common
            xhat = g * z
            nn_idx, dist = nearest_lattice(xhat, const)

            # contaminated-symbol scores over non-pilot symbols, top-2 kept
            wdist = gamma_p[:, np_syms, :] * dist[:, np_syms, :] ** 2
            scores = -wdist.mean(axis=2)                  # (C, n_np)
            order = np.argsort(scores, axis=1, kind="stable")[:, :2]
            det = np_syms[order]                          # (C, 2)
            tr.det_syms[c0:c1, mi] = det

            # heuristic per-coherence-block SINR on the detected symbols
            for slot in range(2):
                rows = dist[np.arange(C), det[:, slot]]   # (C, K)
                dmax = rows.reshape(C, K // cfg.k_rb, cfg.k_rb).max(axis=2)
                with np.errstate(divide="ignore"):
                    gh = np.minimum(1.0 / dmax ** 2, SINR_CEILING)
                tr.h_lin[c0:c1, mi, slot] = cfg.k_rb * gh.sum(axis=1)
                tr.h_exp[c0:c1, mi, slot] = cfg.k_rb * np.exp(-gh / betas[mi]).sum(axis=1)

            err = np.abs(x - xhat) ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                grec = np.where(err > 0, np.abs(x) ** 2 / err, np.inf)
            grec = np.minimum(grec, SINR_CEILING)
            tr.r_avg[c0:c1, mi] = np.where(dm, grec, 0.0).sum(axis=(1, 2)) / n_data_sym.sum()
            mexp = np.where(dm, np.exp(-grec / betas[mi]), 0.0).sum(axis=(1, 2)) / n_data_sym.sum()
            tr.r_eesm[c0:c1, mi] = -betas[mi] * np.log(mexp)

            ref = np.where(dm, const.points[nn_idx], x)   # known pilots, decided data
            tr.res_pow[c0:c1, mi] = np.mean(np.abs(z - h * ref) ** 2, axis=(1, 2))
            tr.rx_pow[c0:c1, mi] = np.mean(np.abs(z) ** 2, axis=(1, 2))
    return tr


@dataclass(frozen=True)
class LinkMetrics:
    """Steady-state link statistics plus the per-block decision trace."""

    throughput_bps: float
    bler: float
    harq_latency_ms: float
    scheme: str
    estimator: str
    blocks_measured: int
    trace: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.bler <= 1.0:
            raise InputError("BLER outside [0, 1]")


def harq_latency(bler: float, tau_wait: float) -> float:
    """Mean retransmission-induced latency bler * tau_wait / (1 - bler)."""
    if not 0.0 <= bler < 1.0:
        raise InputError("bler must lie in [0, 1)")
    return bler * tau_wait / (1.0 - bler)


def _mod_index(mod: int) -> int:
    return MODULATIONS.index(mod)


def run_link(trace: BlockTrace, cfg: ScenarioConfig, table: McsTable | None = None) -> LinkMetrics:
    """Replay the causal feedback/HARQ loop over a PHY trace."""
    if table is None:
        table = McsTable.default()
    B = trace.n_blocks
    n_bits_re = trace.n_data_re
    mode = cfg.wideband_mode
    crc_rng = np.random.default_rng([cfg.seed, _STREAM_CRC, SCHEME_IDS[
        "genie" if cfg.estimator == "true" else cfg.scheme]])

    tracker = PriTracker(cfg.pri_window, cfg.pri_threshold, trace.geom.block_duration)
    npi = NpiReference()
    window_cqi: list[int] = []
    window_flags: list[bool] = []
    reports: list[tuple[int, object]] = []      # (arrival block, report)
    active_report = None
    retx_due: dict[int, tuple] = {}             # block -> (mcs_index, attempt)

    est_cqi = np.zeros(B, dtype=int)
    mcs_used = np.zeros(B, dtype=int)
    crc_ok = np.zeros(B, dtype=bool)
    was_retx = np.zeros(B, dtype=bool)
    predicted = np.zeros(B, dtype=bool)
    est_gamma = np.zeros(B)
    true_gamma = np.zeros(B)

    delivered_bits = 0.0
    n_first = n_fail = n_tx = n_retx = 0
    tau_blocks = max(1, int(round(cfg.tau_wait_ms * 1e-3 / trace.geom.block_duration)))
    warm = cfg.warmup

    for b in range(B):
        while reports and reports[0][0] <= b:
            active_report = reports.pop(0)[1]

        # ---- transmitter side: pick the MCS in force
        if b in retx_due:
            mcs_idx, attempt = retx_due.pop(b)
            is_retx = True
        else:
            is_retx = False
            attempt = 0
            if cfg.estimator == "true":
                mcs_idx = table.entries[0].index
                for e in table.entries:
                    g = trace.true_wideband(b, _mod_index(e.modulation), mode)
                    if bler_model(g, e, table) <= cfg.target_bler:
                        mcs_idx = e.index
            elif active_report is None:
                mcs_idx = table.entries[0].index
            elif cfg.scheme == "dual":
                rep = active_report
                use_int = (rep.impaired is not None
                           and bool(rep.radar_indicator_lookup(b)))
                cqi = rep.impaired.cqi if use_int else rep.fading.cqi
                mcs_idx = select_mcs_from_cqi(cqi, table)
            else:
                mcs_idx = select_mcs_from_cqi(active_report, table)
        entry = table.entry(mcs_idx)
        mi = _mod_index(entry.modulation)

        # ---- channel outcome at the transported modulation
        g_true = trace.true_wideband(b, mi, mode)
        ok = bool(crc_rng.random() >= bler_model(g_true, entry, table))
        mcs_used[b] = mcs_idx
        crc_ok[b] = ok
        was_retx[b] = is_retx
        true_gamma[b] = g_true

        if b >= warm:
            n_tx += 1
            if is_retx:
                n_retx += 1
            else:
                n_first += 1
            if not ok:
                n_fail += 1
            elif not is_retx:
                delivered_bits += entry.efficiency * n_bits_re
            else:
                delivered_bits += entry.efficiency * n_bits_re
        if not ok and attempt < cfg.harq_max_retx:
            due = b + tau_blocks
            if due < B:
                retx_due[due] = (mcs_idx, attempt + 1)

        # ---- receiver side: per-block SINR estimate and CSI bookkeeping
        tracker.update(b, trace.res_pow[b, mi] if cfg.power_series == "residual"
                       else trace.rx_pow[b, mi])
        pred = tracker.predicted_pulse_count(b) > 0
        predicted[b] = pred
        pilot_avg_db = 10 * math.log10(max(trace.pilot_wideband(b, mi, "average"), 1e-12))

        pilot_hit = False
        if cfg.estimator == "hybrid" and pred and npi.ready:
            pilot_hit = detect_pilot_contamination(pilot_avg_db, npi.reference_db,
                                                   cfg.gamma_th_db)
        if cfg.use_reconstruction and ok and cfg.estimator != "pilot":
            g_est = trace.r_eesm[b, mi] if mode == "eesm" else trace.r_avg[b, mi]
        elif cfg.estimator == "hybrid" and pred and not pilot_hit:
            count = min(tracker.predicted_pulse_count(b), 2)
            g_est = trace.hybrid_wideband(b, mi, mode, count)
        else:
            g_est = trace.pilot_wideband(b, mi, mode)
        est_gamma[b] = g_est
        if not pred:
            npi.update(pilot_avg_db)

        window_cqi.append(cqi_from_sinr(g_est, table))
        window_flags.append(pred)
        est_cqi[b] = window_cqi[-1]

        if len(window_cqi) == cfg.t_csi_blocks:
            arrival = b + cfg.csi_delay_blocks
            if cfg.scheme == "dual":
                start = arrival
                ind = np.array([tracker.predicted_pulse_count(start + i) > 0
                                for i in range(cfg.t_csi_blocks)])
                from .feedback import dual_csi_report
                rep = dual_csi_report(window_cqi, window_flags, ind)
                rep = _DualInForce(rep, start)
                reports.append((arrival, rep))
            else:
                from .feedback import quantize_window
                reports.append((arrival, quantize_window(window_cqi, cfg.scheme)))
            window_cqi = []
            window_flags = []

    bler = n_fail / n_tx if n_tx else 0.0
    thr = delivered_bits / ((B - warm) * trace.geom.block_duration) if B > warm else 0.0
    lat_ms = (cfg.tau_wait_ms * n_retx / n_first) if n_first else 0.0
    label = "genie" if cfg.estimator == "true" else cfg.scheme
    return LinkMetrics(
        throughput_bps=thr, bler=bler, harq_latency_ms=lat_ms, scheme=label,
        estimator=cfg.estimator, blocks_measured=max(B - warm, 0),
        trace=dict(mcs=mcs_used, crc_ok=crc_ok, retx=was_retx, est_cqi=est_cqi,
                   predicted=predicted, est_gamma=est_gamma, true_gamma=true_gamma))


class _DualInForce:
    """Dual report bound to the absolute block index its indicator covers."""

    def __init__(self, report, start_block: int):
        self.fading = report.fading
        self.impaired = report.impaired
        self._indicator = report.radar_indicator
        self._start = start_block

    def radar_indicator_lookup(self, block: int) -> bool:
        i = block - self._start
        if 0 <= i < len(self._indicator):
            return bool(self._indicator[i])
        return bool(self._indicator[-1]) if len(self._indicator) else False


def run_scenario(cfg: ScenarioConfig, table: McsTable | None = None,
                 trace: BlockTrace | None = None) -> LinkMetrics:
    """Simulate the PHY (unless a shared trace is supplied) and run the loop."""
    if trace is None:
        trace = simulate_phy(cfg)
    return run_link(trace, cfg, table)


def max_achievable_rate(cfg: ScenarioConfig, table: McsTable | None = None,
                        trace: BlockTrace | None = None) -> LinkMetrics:
    """Genie bound: per-block MCS from the true wideband SINR, no feedback path."""
    genie = replace(cfg, estimator="true")
    if trace is None:
        trace = simulate_phy(genie)
    return run_link(trace, genie, table)
