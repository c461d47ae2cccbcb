"""The constant C_F = 2 ||F||^2 / (vol * [PSL2(O_K) : Gamma_0(11)]) from first principles.

Computes the Petersson norm by Gauss quadrature over a fundamental domain of
PSL2(Z[i]) summed over the cosets of Gamma_0(11), measures the covolume by
quadrature too, and compares C_F with the slope fitted to the symbol variances
(which needs the symbols computed by variance_and_normality.py).

Run:  python demos/variance_constant.py
"""
from bianchi_modsym import FormSpec
from bianchi_modsym.constants import (c_f, covolume, fundamental_domain_volume, index_gamma0,
                                      petersson_norm)
from bianchi_modsym.quadfield import zeta_K2
from bianchi_modsym.verify import DEFAULT_FORM, Context, RunConfig

# heights in the fundamental domain stay above 1/(11 sqrt 2): 20000 norms suffice
form = FormSpec.from_dict({**DEFAULT_FORM, "norm_bound": 20000})
form.load()
fld = form.fld

measured = fundamental_domain_volume(fld)
print(f"zeta_K(2) = {zeta_K2(fld):.12f}")
print(f"covolume: quadrature {measured:.10f}, |d_K|^(3/2) zeta_K(2)/(4 pi^2) = "
      f"{covolume(fld, 'literature'):.10f}")
print(f"index of Gamma_0(11): {index_gamma0(form.level)}")

norm_sq, err = petersson_norm(form)
print(f"||F||^2 = {norm_sq:.8f} (fine vs coarse mesh differ by {err:.1e})")
rep = c_f(form, (norm_sq, err))
print(f"C_F = {rep.C_F:.6f}")
for name, value in rep.alternative_assemblies.items():
    print(f"  alternative assembly {name}: {value:.6f}")

C_fit = Context(RunConfig()).summary.C_fit
print(f"\nslope fitted to the symbol variances: {C_fit:.6f} "
      f"(relative gap {abs(C_fit - rep.C_F) / rep.C_F:.1%})")
