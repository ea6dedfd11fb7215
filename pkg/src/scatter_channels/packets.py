"""Channel wave packets built by superposing stationary states.

    psi_ch(x, t) = (2 pi)**-1/2 * sum_k w_k A(k) psi_ch(x; k**2) exp(-i k**2 t)

with Gauss-Legendre nodes/weights (k, w) on a truncated Gaussian support.
There is no time stepping: every snapshot is exact up to the k- and
x-quadratures, and Psi_full = psi_tr + psi_ref holds node by node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainTooSmallError, SpectrumDomainError, StaleCacheError
from .quadrature import gauss_legendre, panel_grid
from .stationary import current_density, decompose

CHANNELS = ("full", "tr", "ref")
EDGE_DENSITY = 1e-8


@dataclass(frozen=True)
class SpectralAmplitude:
    k: np.ndarray
    weights: np.ndarray
    amplitude: np.ndarray
    k0: float
    sigma_k: float
    x0: float
    cutoff: float
    chirp: float = 0.0
    rule: str = "gauss-legendre"

    @property
    def sigma_x(self):
        return 1.0 / (2.0 * self.sigma_k)

    def norm(self):
        return float(np.sum(self.weights * np.abs(self.amplitude) ** 2))

    def average(self, f_of_k):
        """Spectral average sum w |A|**2 f(k) of a per-node quantity."""
        return float(np.sum(self.weights * np.abs(self.amplitude) ** 2 * f_of_k))

    def refined(self, n_k):
        """Same packet on a different number of nodes (for quadrature-error estimates)."""
        return _gaussian(self.k0, self.sigma_k, n_k, self.cutoff, self.x0, self.chirp)


def _gaussian(k0, sigma_k, n_k, cutoff, x0, chirp=0.0):
    kmin = k0 - cutoff * sigma_k
    if not kmin > 0:
        raise SpectrumDomainError(
            f"spectrum support reaches k = {kmin:g} <= 0; packets must be left-incident"
        )
    if n_k < 64:
        raise SpectrumDomainError(f"need at least 64 k-nodes, got {n_k}")
    k, w = gauss_legendre(kmin, k0 + cutoff * sigma_k, n_k)
    mag = np.exp(-((k - k0) ** 2) / (4 * sigma_k**2))
    mag /= np.sqrt(np.sum(w * mag**2))
    phase = np.exp(-1j * k * x0 + 1j * chirp * (k - k0) ** 2)
    return SpectralAmplitude(
        k, w, mag * phase, float(k0), float(sigma_k), float(x0), float(cutoff), float(chirp)
    )


def gaussian_spectrum(k0, sigma_k, n_k=512, cutoff=8.0, x0=0.0):
    """Normalized Gaussian A(k) centred on k0, packet centred at x0 at t = 0.

    |A|**2 has standard deviation sigma_k, so the packet has sigma_x = 1/(2 sigma_k).
    """
    return _gaussian(k0, sigma_k, n_k, cutoff, x0)


def chirped_spectrum(k0, sigma_k, chirp, n_k=512, cutoff=8.0, x0=0.0):
    """Gaussian with an extra quadratic spectral phase exp(i chirp (k - k0)**2)."""
    return _gaussian(k0, sigma_k, n_k, cutoff, x0, chirp)


@dataclass
class WavePacketField:
    x: np.ndarray
    t: float
    values: np.ndarray
    channel: str

    @property
    def density(self):
        return np.abs(self.values) ** 2

    def max_jump(self):
        return float(np.max(np.abs(np.diff(self.values))))

    def jump_bound(self, k_max):
        """Largest adjacent-sample change a continuous field with wavenumbers <= k_max
        can show: roughly |psi|_max * k_max * dx, with a factor 2 of slack."""
        dx = float(np.max(np.diff(self.x)))
        return 2.0 * float(np.max(np.abs(self.values))) * k_max * dx

    def is_continuous(self, k_max):
        return self.max_jump() <= self.jump_bound(k_max)


class ChannelPackets:
    """Full, transmission and reflection packets for one barrier and one spectrum.

    The stationary decomposition on the k-grid is computed once by
    ``precompute`` and then only read.
    """

    def __init__(self, spec, spectrum: SpectralAmplitude, precompute=True):
        self.spec = spec
        self.spectrum = spectrum
        self._dec = None
        self._dec_spectrum = None
        self._basis_cache = {}
        if precompute:
            self.precompute()

    def precompute(self):
        self._dec = decompose(self.spec, self.spectrum.k**2)
        self._dec_spectrum = self.spectrum
        self._basis_cache = {}
        return self

    @property
    def decomposition(self):
        if self._dec is None or self._dec_spectrum is not self.spectrum:
            raise StaleCacheError("channel states are not precomputed for the current spectrum")
        return self._dec

    @property
    def T_avg(self):
        """Packet transmission probability sum w |A|**2 T(k)."""
        return self.spectrum.average(self.decomposition.T)

    @property
    def R_avg(self):
        return self.spectrum.average(self.decomposition.R)

    def coefficients(self, t):
        s = self.spectrum
        return s.weights * s.amplitude * np.exp(-1j * s.k**2 * t) / np.sqrt(2 * np.pi)

    def _basis(self, x):
        """(Phi_full, dPhi_full, Phi_ref, dPhi_ref) on x; Phi_ref already clipped at x_c."""
        key = (x.shape, x.tobytes()) if x.size <= 100_000 else None
        if key is not None and key in self._basis_cache:
            return self._basis_cache[key]
        dec = self.decomposition
        pf, df = dec.psi_full.field(x)
        pr, dr = dec.psi_ref_solution.field(x)
        inside = x <= self.spec.x_c
        pr = np.where(inside, pr, 0)
        dr = np.where(inside, dr, 0)
        out = (pf, df, pr, dr)
        if key is not None:
            if len(self._basis_cache) > 4:
                self._basis_cache.clear()
            self._basis_cache[key] = out
        return out

    def field(self, channel, x, t):
        """psi and dpsi/dx of one channel packet at positions x."""
        if channel not in CHANNELS:
            raise ValueError(f"unknown channel {channel!r}")
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        pf, df, pr, dr = self._basis(flat)
        c = self.coefficients(t)
        if channel == "full":
            psi, dpsi = c @ pf, c @ df
        elif channel == "ref":
            psi, dpsi = c @ pr, c @ dr
        else:
            psi, dpsi = c @ (pf - pr), c @ (df - dr)
        return psi.reshape(x.shape), dpsi.reshape(x.shape)

    def synthesize(self, channel, x, t) -> WavePacketField:
        x = np.asarray(x, dtype=float)
        return WavePacketField(x, float(t), self.field(channel, x, t)[0], channel)

    def current(self, channel, x, t):
        return current_density(*self.field(channel, x, t))

    # integrals over x

    def quadrature_grid(self, x_domain, panel=2.0, order=24):
        lo, hi = x_domain
        return panel_grid(lo, hi, list(self.spec.boundaries()) + [self.spec.x_c], panel, order)

    def check_domain(self, t, x_domain):
        edge = np.abs(self.field("full", np.asarray(x_domain, dtype=float), t)[0]) ** 2
        if edge.max() > EDGE_DENSITY:
            raise DomainTooSmallError(float(edge.max()), EDGE_DENSITY)

    def channel_norm(self, channel, t, x_domain, region=None):
        """<psi|psi> over x_domain (optionally only over ``region`` = (lo, hi))."""
        self.check_domain(t, x_domain)
        x, w = self.quadrature_grid(x_domain)
        psi = self.field(channel, x, t)[0]
        if region is not None:
            w = w * ((x >= region[0]) & (x <= region[1]))
        return float(np.sum(w * np.abs(psi) ** 2))

    def channel_overlap(self, t, x_domain):
        """<psi_tr|psi_ref>, integrated over x <= x_c where psi_ref lives."""
        self.check_domain(t, x_domain)
        x, w = self.quadrature_grid((x_domain[0], self.spec.x_c))
        tr = self.field("tr", x, t)[0]
        ref = self.field("ref", x, t)[0]
        return complex(np.sum(w * np.conj(tr) * ref))

    def series(self, times, x_domain):
        """Norms of all channels and the tr/ref overlap at each time, one basis evaluation."""
        x, w = self.quadrature_grid(x_domain)
        pf, _, pr, _ = self._basis(x)
        rows = []
        for t in times:
            self.check_domain(t, x_domain)
            c = self.coefficients(t)
            full = c @ pf
            ref = c @ pr
            tr = full - ref
            rows.append(
                dict(
                    t=float(t),
                    norm_full=float(np.sum(w * np.abs(full) ** 2)),
                    norm_tr=float(np.sum(w * np.abs(tr) ** 2)),
                    norm_ref=float(np.sum(w * np.abs(ref) ** 2)),
                    overlap=complex(np.sum(w * np.conj(tr) * ref)),
                )
            )
        return rows

    def kink_flux(self, t):
        """J(x_c+) - J(x_c-) for psi_tr, which equals d<psi_tr|psi_tr>/dt.

        psi_tr is continuous at x_c but its slope jumps by sum c_k C_k, so the
        two one-sided currents agree only when C(k)/Psi_full(x_c; k) is the
        same real number for every k in the packet.
        """
        xc = np.array([self.spec.x_c])
        pf, df, _, _ = self._basis(xc)
        c = self.coefficients(t)
        psi = c @ pf[:, 0]
        slope = c @ df[:, 0]
        jump = c @ self.decomposition.C
        return float(current_density(psi, slope) - current_density(psi, slope - jump))

    def quadrature_error(self, t, x_domain, n_k=None):
        """Overlap change when the k-grid is doubled and the x-rule order raised."""
        n_k = n_k or 2 * len(self.spectrum.k)
        fine = ChannelPackets(self.spec, self.spectrum.refined(n_k))
        lo, hi = x_domain
        x, w = panel_grid(lo, self.spec.x_c, list(self.spec.boundaries()) + [self.spec.x_c], 2.0, 36)
        tr = fine.field("tr", x, t)[0]
        ref = fine.field("ref", x, t)[0]
        fine_ov = complex(np.sum(w * np.conj(tr) * ref))
        return abs(fine_ov - self.channel_overlap(t, x_domain))

    def overlap_quadrature_errors(self, times, x_domain, n_k=None):
        """quadrature_error at several times, building the refined packet once."""
        n_k = n_k or 2 * len(self.spectrum.k)
        fine = ChannelPackets(self.spec, self.spectrum.refined(n_k))
        lo = x_domain[0]
        breaks = list(self.spec.boundaries()) + [self.spec.x_c]
        xf, wf = panel_grid(lo, self.spec.x_c, breaks, 2.0, 36)
        xc, wc = self.quadrature_grid((lo, self.spec.x_c))
        ff, _, fr, _ = fine._basis(xf)
        cf, _, cr, _ = self._basis(xc)
        out = []
        for t in times:
            a, b = fine.coefficients(t), self.coefficients(t)
            ref_f, ref_c = a @ fr, b @ cr
            ov_f = np.sum(wf * np.conj(a @ ff - ref_f) * ref_f)
            ov_c = np.sum(wc * np.conj(b @ cf - ref_c) * ref_c)
            out.append(float(abs(ov_f - ov_c)))
        return np.array(out)
