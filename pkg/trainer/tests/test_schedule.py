import numpy as np
import pytest
import torch

from swediff.schedule import NoiseSchedule, forward_diffuse


class TestNoiseSchedule:
    def test_default_schedule_shape(self):
        s = NoiseSchedule()
        assert s.T == 1000
        assert s.betas[0] == pytest.approx(1e-4)
        assert s.betas[-1] == pytest.approx(2e-2)

    def test_betas_nondecreasing_alpha_bar_strictly_decreasing(self):
        s = NoiseSchedule()
        assert (torch.diff(s.betas) >= 0).all()
        assert (torch.diff(s.alpha_bars) < 0).all()

    def test_alpha_bar_one_is_close_to_one(self):
        s = NoiseSchedule()
        assert float(s.alpha_bar(1)) == pytest.approx(1.0, abs=1e-3)

    def test_t_out_of_range_rejected(self):
        s = NoiseSchedule()
        for t in (0, 1001, -3):
            with pytest.raises(ValueError, match="out of range"):
                s.alpha_bar(t)

    def test_bad_parameters_rejected(self):
        with pytest.raises(ValueError):
            NoiseSchedule(T=1)
        with pytest.raises(ValueError):
            NoiseSchedule(beta_start=0.0)
        with pytest.raises(ValueError):
            NoiseSchedule(beta_start=0.5, beta_end=0.1)


class TestForwardDiffuse:
    def test_small_t_is_near_identity(self):
        s = NoiseSchedule()
        gen = torch.Generator().manual_seed(0)
        z = torch.randn(4, 3, 8, 8, generator=gen, dtype=torch.float64)
        eps = torch.randn(z.shape, generator=gen, dtype=torch.float64)
        z1 = forward_diffuse(z, 1, eps, s)
        rms = float(((z1 - z) ** 2).mean().sqrt() / (z**2).mean().sqrt())
        assert rms < 0.02

    def test_terminal_t_is_near_standard_normal(self):
        s = NoiseSchedule()
        gen = torch.Generator().manual_seed(1)
        z = torch.randn(100, 100, generator=gen, dtype=torch.float64)
        eps = torch.randn(z.shape, generator=gen, dtype=torch.float64)
        zT = forward_diffuse(z, s.T, eps, s)
        assert abs(float(zT.mean())) < 0.05
        assert float(zT.var()) == pytest.approx(1.0, abs=0.05)

    def test_broadcasts_per_sample_t(self):
        s = NoiseSchedule()
        z = torch.ones(3, 2, 4, 4, dtype=torch.float64)
        eps = torch.zeros_like(z)
        t = torch.tensor([1, 500, 1000])
        out = forward_diffuse(z, t, eps, s)
        expected = torch.sqrt(s.alpha_bar(t))
        for k in range(3):
            assert torch.allclose(out[k], expected[k])

    def test_shape_mismatch_rejected(self):
        s = NoiseSchedule()
        with pytest.raises(ValueError, match="shape"):
            forward_diffuse(torch.zeros(2, 2), 1, torch.zeros(3, 2), s)

    def test_per_modality_noise_is_independent(self):
        # the draws used for the two modalities come from separate randn
        # calls; their sample correlation over 10^4 entries stays near zero
        gen = torch.Generator().manual_seed(7)
        eps_v = torch.randn(10_000, generator=gen)
        eps_p = torch.randn(10_000, generator=gen)
        r = np.corrcoef(eps_v.numpy(), eps_p.numpy())[0, 1]
        assert abs(r) < 0.05
