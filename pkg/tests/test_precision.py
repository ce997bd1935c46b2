"""Output-precision rules: clipping statistics, rule ordering, Lloyd-Max."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from imclim.precision import (
    bgc_bits,
    gaussian_clip_stats,
    lloyd_max,
    mpc_min_bits,
    quantize,
    sqnr_bgc_db,
    sqnr_mpc_db,
)
from imclim.snr import (
    QuantizerSpec,
    SignalModel,
    db,
    par_db,
    sqnr_qy_db,
    sqnr_uniform_db,
    undb,
)

ZX = par_db(SignalModel.uniform_unsigned(1.0), True)
ZW = par_db(SignalModel.uniform_signed(1.0))


class TestBgc:
    @pytest.mark.parametrize("bx,bw,n,expected", [(7, 7, 4, 16), (7, 7, 64, 20), (1, 1, 1, 2)])
    def test_bit_assignment(self, bx, bw, n, expected):
        assert bgc_bits(bx, bw, n) == expected

    def test_non_power_of_two_rounds_up(self):
        assert bgc_bits(4, 4, 100) == 8 + 7

    def test_sqnr_quadruple_n(self):
        gain = sqnr_bgc_db(7, 7, ZX, ZW, 256) - sqnr_bgc_db(7, 7, ZX, ZW, 64)
        assert gain == pytest.approx(db(4.0), abs=1e-9)

    def test_sqnr_reference_point(self):
        # Hand evaluation: 10log10(3) + 14*10log10(4) - zx - zw + 10log10(64).
        expected = db(3.0) + 14 * db(4.0) - ZX - ZW + db(64.0)
        assert expected == pytest.approx(103.60, abs=0.01)
        assert sqnr_bgc_db(7, 7, ZX, ZW, 64) == pytest.approx(expected, abs=1e-12)


def _closed_form_tail(zeta: float) -> tuple[float, float]:
    """Gaussian clip stats by closed form: the independent oracle.

    E[(X-a)^2; X > a] = (1 + a^2) Q(a) - a phi(a) for standard normal X.
    """
    q = 0.5 * special.erfc(zeta / math.sqrt(2.0))
    phi = math.exp(-0.5 * zeta * zeta) / math.sqrt(2.0 * math.pi)
    tail = (1.0 + zeta**2) * q - zeta * phi
    p = 2.0 * q
    return p, 2.0 * tail / p


class TestClipStats:
    def test_four_sigma_probability(self):
        c = gaussian_clip_stats(4.0)
        assert c.p_clip == pytest.approx(6.33e-5, rel=1e-3)
        assert c.p_clip < 0.001

    def test_quadrature_matches_closed_form(self):
        for zeta in (1.0, 2.0, 3.0, 4.0, 5.0):
            c = gaussian_clip_stats(zeta)
            p, scc = _closed_form_tail(zeta)
            assert c.p_clip == pytest.approx(p, rel=1e-10)
            assert c.sigma2_cc == pytest.approx(scc, rel=1e-8)

    def test_quadrature_matches_monte_carlo(self):
        # Clip probability from direct sampling where 1e7 draws resolve 2%,
        # conditional clipping moment from exact tail sampling everywhere
        # (inverse-CDF draws restricted to the exceed region).
        rng = np.random.default_rng(0)
        y = rng.standard_normal(10_000_000)
        for zeta in (2.0, 2.5, 3.0):
            c = gaussian_clip_stats(zeta)
            p_mc = float(np.mean(np.abs(y) > zeta))
            assert c.p_clip == pytest.approx(p_mc, rel=0.02)
        for zeta in (2.0, 3.0, 4.0, 5.0):
            c = gaussian_clip_stats(zeta)
            u = rng.uniform(special.ndtr(zeta), 1.0, 1_000_000)
            tail = special.ndtri(u)
            scc_mc = float(np.mean((tail - zeta) ** 2))
            assert c.sigma2_cc == pytest.approx(scc_mc, rel=0.02)

    def test_limits(self):
        assert gaussian_clip_stats(0.0).p_clip == 1.0
        far = gaussian_clip_stats(9.0)
        assert far.p_clip < 1e-18

    def test_monotone_in_zeta(self):
        ps = [gaussian_clip_stats(z).p_clip for z in np.linspace(0.5, 6.0, 12)]
        assert all(a >= b for a, b in zip(ps, ps[1:]))


class TestMpc:
    def test_eight_bit_four_sigma(self):
        val = sqnr_mpc_db(8, gaussian_clip_stats(4.0))
        assert val == pytest.approx(40.58, abs=0.02)

    def test_no_clipping_reduces_to_uniform(self):
        from imclim.precision import ClipStats

        clean = ClipStats(zeta_mpc=4.0, p_clip=0.0, sigma2_cc=0.0)
        assert sqnr_mpc_db(8, clean) == pytest.approx(
            sqnr_uniform_db(8, 20.0 * math.log10(4.0)), abs=1e-12
        )

    def test_argmax_at_four_sigma(self):
        zetas = np.arange(2.0, 6.01, 0.5)
        vals = [sqnr_mpc_db(8, gaussian_clip_stats(z)) for z in zetas]
        assert zetas[int(np.argmax(vals))] == pytest.approx(4.0)

    def test_formula_matches_quantizer_simulation(self):
        # Independent oracle: clip-and-quantize a large Gaussian sample.
        rng = np.random.default_rng(7)
        y = rng.standard_normal(1_000_000)
        for zeta, by in ((3.0, 6), (4.0, 8), (5.0, 10)):
            err = quantize(y, QuantizerSpec(by, zeta, signed=True)) - y
            err -= err.mean()
            mc = db(1.0 / float(np.mean(err**2)))
            assert sqnr_mpc_db(by, gaussian_clip_stats(zeta)) == pytest.approx(
                mc, abs=0.3
            )

    def test_beats_tbgc_at_moderate_n(self):
        # Rule ordering at equal bit count, n >= 16, checked on the formulas.
        for n in (16, 64, 256, 1024):
            assert sqnr_mpc_db(8, gaussian_clip_stats(4.0)) > sqnr_qy_db(8, ZX, ZW, n)


class TestMpcMinBits:
    def test_reference_points(self):
        assert mpc_min_bits(31.0, 0.5) == 8
        assert mpc_min_bits(40.0, 0.5) == 10

    def test_gamma_half_db_constant(self):
        # gamma = 0.5 dB folds to ceil((snr + 16.3)/6).
        for snr in (10.0, 25.0, 33.3, 47.0):
            explicit = math.ceil((snr + 7.2 - 0.5 - db(1 - undb(-0.5))) / 6.0)
            assert mpc_min_bits(snr, 0.5) == explicit
            assert explicit == math.ceil((snr + 16.336) / 6.0)

    def test_gamma_half_implies_nine_db_margin(self):
        # Requiring at most a 0.5 dB total-SNR sacrifice puts the output
        # quantizer about 9 dB above the pre-converter SNR.
        margin = -db(undb(0.5) - 1.0)
        assert margin == pytest.approx(9.136, abs=0.001)
        combined = -db(undb(-30.0) + undb(-(30.0 + margin)))
        assert 30.0 - combined == pytest.approx(0.5, abs=1e-9)

    def test_invalid_gamma(self):
        with pytest.raises(ValueError):
            mpc_min_bits(30.0, 0.0)
        with pytest.raises(ValueError):
            mpc_min_bits(30.0, -1.0)


class TestQuantize:
    def test_zero_maps_to_positive_half_step(self):
        q = QuantizerSpec(4, 1.0, signed=True)
        assert quantize(0.0, q) == pytest.approx(q.step / 2.0)

    def test_saturation(self):
        q = QuantizerSpec(4, 1.0, signed=True)
        assert quantize(3.0, q) == pytest.approx(1.0 - q.step / 2.0)
        assert quantize(-3.0, q) == pytest.approx(-1.0 + q.step / 2.0)

    def test_vanishing_step_is_identity(self):
        q = QuantizerSpec(24, 1.0, signed=True)
        v = 0.4217
        assert quantize(v, q) == pytest.approx(v, abs=q.step)

    def test_ties_round_away_from_zero(self):
        q = QuantizerSpec(3, 1.0, signed=True)
        edge = 2.0 * q.step
        assert quantize(edge, q) == pytest.approx(edge + q.step / 2.0)
        assert quantize(-edge, q) == pytest.approx(-edge - q.step / 2.0)

    def test_unsigned_clips_at_zero(self):
        q = QuantizerSpec(4, 1.0, signed=False)
        assert quantize(-0.5, q) == pytest.approx(q.step / 2.0)

    @settings(max_examples=200)
    @given(st.floats(-10, 10), st.integers(1, 12))
    def test_error_bounded_inside_range(self, v, bits):
        q = QuantizerSpec(bits, 1.0, signed=True)
        out = quantize(v, q)
        if abs(v) <= 1.0:
            assert abs(out - v) <= q.step / 2.0 + 1e-12
        assert abs(out) <= 1.0 - q.step / 2.0 + 1e-12


class TestLloydMax:
    def test_two_level_gaussian(self):
        res = lloyd_max(SignalModel.gaussian(1.0), 2)
        expected = math.sqrt(2.0 / math.pi)
        assert res.codebook == pytest.approx([-expected, expected], abs=1e-6)

    def test_uniform_source_equals_uniform_quantizer(self):
        res = lloyd_max(SignalModel.uniform_signed(1.0), 2**5)
        assert res.converged
        assert res.sqnr_db == pytest.approx(sqnr_uniform_db(5, ZW), abs=1e-6)

    def test_gaussian_256_converges_to_optimum(self):
        # Fully converged 256-level quantizer approaches the high-resolution
        # optimum for a Gaussian source, 10log10(2/(sqrt(3) pi) 4^B) = 43.8 dB.
        res = lloyd_max(SignalModel.gaussian(1.0), 256, max_iter=30000, tol=1e-12)
        asymptote = db(1.0 / (math.pi * math.sqrt(3.0) / 2.0 * 4.0**-8))
        assert res.sqnr_db == pytest.approx(asymptote, abs=0.3)

    def test_default_budget_reports_nonconvergence(self):
        res = lloyd_max(SignalModel.gaussian(1.0), 256, max_iter=200)
        assert not res.converged
        assert 40.5 < res.sqnr_db < 42.0

    def test_optimality_chain_at_equal_levels(self):
        # Optimal quantizer >= clipped-uniform >= full-range uniform (dB).
        lm = lloyd_max(SignalModel.gaussian(1.0), 256, max_iter=30000, tol=1e-12)
        mpc = sqnr_mpc_db(8, gaussian_clip_stats(4.0))
        tbgc = sqnr_qy_db(8, ZX, ZW, 64)
        assert lm.sqnr_db >= mpc >= tbgc

    def test_codebook_mse_against_fine_grid(self):
        # Brute-force MSE of the returned codebook on a dense Gaussian grid.
        res = lloyd_max(SignalModel.gaussian(1.0), 16, max_iter=30000, tol=1e-12)
        xs = np.linspace(-8, 8, 400001)
        pdf = np.exp(-0.5 * xs**2) / math.sqrt(2 * math.pi)
        idx = np.searchsorted(res.boundaries, xs)
        err2 = (xs - res.codebook[idx]) ** 2
        mse = float(np.trapezoid(err2 * pdf, xs))
        assert db(1.0 / mse) == pytest.approx(res.sqnr_db, abs=0.01)

    def test_empirical_samples_route(self):
        rng = np.random.default_rng(3)
        model = SignalModel.empirical(rng.standard_normal(200000))
        res = lloyd_max(model, 8, max_iter=500)
        ref = lloyd_max(SignalModel.gaussian(1.0), 8, max_iter=2000)
        assert res.sqnr_db == pytest.approx(ref.sqnr_db, abs=0.25)


class TestPrecisionAssignment:
    def test_rule_records(self):
        from imclim.precision import PrecisionAssignment, PrecisionRule
        from imclim.snr import DotProductSpec, dp_output_stats

        dp = DotProductSpec.unit_uniform(64)
        sigma2, y_max, _ = dp_output_stats(dp)
        bgc = PrecisionAssignment(
            PrecisionRule.BGC, by=bgc_bits(7, 7, 64), clip_level=y_max,
            achieved_sqnr_db=sqnr_bgc_db(7, 7, ZX, ZW, 64),
        )
        assert bgc.by == 20 and bgc.clip_level == 64.0
        mpc = PrecisionAssignment(
            PrecisionRule.MPC, by=8, clip_level=4.0 * math.sqrt(sigma2),
            achieved_sqnr_db=sqnr_mpc_db(8, gaussian_clip_stats(4.0)),
        )
        assert mpc.clip_level == pytest.approx(4.0 * math.sqrt(64.0 / 9.0))
        with pytest.raises(ValueError):
            PrecisionAssignment(PrecisionRule.MPC, by=0, clip_level=1.0,
                                achieved_sqnr_db=0.0)
