"""Independent high-precision oracles for frozen test constants (mpmath)."""
import mpmath as mp

mp.mp.dps = 60

def phi_parabola(mu):
    # closed form of int_0^1 dx / (1 - mu (1 - 2x))
    if mu == 0:
        return mp.mpf(1)
    return mp.log((1 + mu) / (1 - mu)) / (2 * mu)

print("ln3", mp.log(3))
print("phi(1-1e-6)", phi_parabola(1 - mp.mpf("1e-6")))
print("t_parabola_rho0(0.5)", mp.quad(lambda m: phi_parabola(m) ** 2, [0, 0.5]))
print("t_parabola_bound", mp.quad(lambda s: phi_parabola(1 - mp.exp(-s)) ** 2 * mp.exp(-s), [0, 1, 5, 20, 60]), mp.pi ** 2 / 6)
print("dphi_example", mp.quad(lambda x: (1 - 2 * x) / (1 - mp.mpf(0.5) * (1 - 2 * x)) ** 2, [0, 1]))

def phi_cubic(mu):
    # 1 - mu f0'(x) = (1 + mu/2) - 6 mu (x - 1/2)^2 for f0 = x(1-x)(1-2x)
    if mu == 0:
        return mp.mpf(1)
    k = 1 + mu / 2
    a = 6 * mu
    return 2 / mp.sqrt(a * k) * mp.atanh(mp.sqrt(a / k) / 2)

print("phi_cubic check", phi_cubic(mp.mpf("0.3")), mp.quad(lambda x: 1 / (1 - mp.mpf("0.3") * (1 - 6 * x + 6 * x * x)), [0, 1]))
print("t_cubic_bound", mp.quad(lambda s: phi_cubic(1 - mp.exp(-s)) ** 2 * mp.exp(-s), [0, 1, 5, 20, 60]))

C0 = 2
s = mp.sqrt(C0) / 2
print("mu1(1;N0=1)", C0 * (mp.sqrt(C0) * mp.cosh(s) - mp.sinh(s)) ** -2)
sig = lambda n: (1 + n * n - n * mp.sqrt(1 + n * n)) / (n - mp.sqrt(1 + n * n))
print("sigma(0,1,10)", sig(0), sig(1), sig(10), sig(10) + 10)
print("2lncosh10", 2 * mp.log(mp.cosh(10)))
