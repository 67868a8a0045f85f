"""High-precision reference values for the core test suite (mpmath, 50 digits)."""
import json
from mpmath import mp, mpf, exp, sqrt, pi, log, ncdf, gammainc, gamma, findroot

mp.dps = 50


def npdf(x, mu, s):
    x, mu, s = mpf(x), mpf(mu), mpf(s)
    return exp(-((x - mu) ** 2) / (2 * s * s)) / (s * sqrt(2 * pi))


def chi2_sf(x, k):
    return gammainc(mpf(k) / 2, mpf(x) / 2, mp.inf) / gamma(mpf(k) / 2)


y = ["-1.3", "0.2", "0.75", "2.1", "-0.4"]
spec = {"pi": "0.325", "mu0": "0.8", "mu1": "-0.3", "sigma0": "1.1", "sigma1": "0.7"}
w = mpf(spec["pi"])
ll = sum(
    log(w * npdf(v, spec["mu0"], spec["sigma0"]) + (1 - w) * npdf(v, spec["mu1"], spec["sigma1"]))
    for v in y
)

out = {
    "normal_pdf_1.5_0.2_0.7": mp.nstr(npdf("1.5", "0.2", "0.7"), 20),
    "normal_cdf_1.959964": mp.nstr(ncdf(mpf("1.959964")), 20),
    "normal_quantile_0.975": mp.nstr(findroot(lambda t: ncdf(t) - mpf("0.975"), 1.96), 20),
    "chi2_sf_7.814728_3": mp.nstr(chi2_sf("7.814728", 3), 20),
    "chi2_sf_3.841459_1": mp.nstr(chi2_sf("3.841459", 1), 20),
    "loglik_n5": {"y": [float(v) for v in y], **{k: float(v) for k, v in spec.items()}, "value": mp.nstr(ll, 20)},
}
print(json.dumps(out, indent=2))
