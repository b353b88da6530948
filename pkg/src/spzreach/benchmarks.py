"""Benchmark models and their default settings."""
from __future__ import annotations

from importlib import resources

from .dynamics import NonlinearSystem, parse_model

GENE_BETA = 0.4
GENE_GAMMA = 0.05
GENE_DELTA = 0.05
GENE_K = 0.05
GENE_INPUT = 0.001

VANDERPOL = {
    "model": "vanderpol",
    "x0": {"lo": [1.23, 2.34], "hi": [1.57, 2.46]},
    "dt": 0.005,
    "t_f": 6.74,
    "lam": 0.1,
    "rho_d": 50,
    "mu_d": 0.01,
    "p_d": 100,
}

GENE_NETWORK = {
    "dt": 0.1,
    "t_f": 5.0,
    "lam": 0.1,
    "rho_d": 10,
    "mu_d": 1.0,
    "p_d": 50,
    "x0_lo": 0.99,
    "x0_hi": 1.01,
}


def builtin_model(name: str) -> NonlinearSystem:
    """Load a model shipped with the package (``models/<name>.model``)."""
    text = resources.files("spzreach").joinpath("models", f"{name}.model").read_text(encoding="utf-8")
    return parse_model(text)


def gene_network_text(N: int) -> str:
    """Cyclic repressor network with N genes (mRNA m_i, protein p_i).

    m_i' = beta / (1 + p_{i-1}^2) - gamma m_i + u_i,  p_i' = k m_i - delta p_i
    """
    if N < 2:
        raise ValueError("the gene network needs at least two genes")
    states = [f"m{i}" for i in range(1, N + 1)] + [f"p{i}" for i in range(1, N + 1)]
    inputs = [f"u{i}" for i in range(1, N + 1)]
    lines = [f"system gene_network_{N}", "states " + " ".join(states), "inputs " + " ".join(inputs), "dynamics"]
    for i in range(1, N + 1):
        prev = N if i == 1 else i - 1
        lines.append(f"m{i}' = {GENE_BETA!r} / (1 + p{prev}^2) - {GENE_GAMMA!r}*m{i} + u{i}")
    for i in range(1, N + 1):
        lines.append(f"p{i}' = {GENE_K!r}*m{i} - {GENE_DELTA!r}*p{i}")
    return "\n".join(lines) + "\n"


def gene_network(N: int) -> NonlinearSystem:
    return parse_model(gene_network_text(N))
