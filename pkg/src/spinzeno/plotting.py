"""Figure rendering for finished runs: reads the CSV output of a run
directory and writes PNG files next to it (or into --out)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import ConfigurationError  # noqa: E402


def _read_csv(path: Path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.ndim == 0:
        data = data.reshape(1)
    return data


def _read_manifest(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _save(fig, out_dir: Path, name: str, paths: list[Path]) -> None:
    path = out_dir / name
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)


def _plot_model_a(run_dir: Path, out_dir: Path, paths: list[Path]) -> None:
    coh = _read_csv(run_dir / "coherence.csv")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    pos = coh["t"] > 0
    ax1.loglog(coh["t"][pos], coh["m_local"][pos], "--", label="local")
    ax1.loglog(coh["t"][pos], coh["m_global"][pos], "-", label="global")
    ax1.set_xlabel("t")
    ax1.set_ylabel("coherence")
    ax1.legend()
    ax2.semilogx(coh["t"][pos], coh["s"][pos], "-", label="S")
    ax2.semilogx(coh["t"][pos], coh["s_uu"][pos], "--", label=r"S$_{\uparrow\uparrow}$")
    ax2.semilogx(coh["t"][pos], coh["s_dd"][pos], ":", label=r"S$_{\downarrow\downarrow}$")
    ax2.axhline(np.log(2), color="0.7", lw=0.8)
    ax2.set_xlabel("t")
    ax2.set_ylabel("entropy")
    ax2.legend()
    fig.tight_layout()
    _save(fig, out_dir, "coherence.png", paths)

    bc = _read_csv(run_dir / "bond_corr.csv")
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for name in bc.dtype.names[1:]:
        ax.semilogx(bc["t"][pos], bc[name][pos], label=name.replace("_", " "))
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\langle S_i\cdot S_{i+1}\rangle$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "bond_corr.png", paths)


def _plot_model_b(run_dir: Path, out_dir: Path, paths: list[Path]) -> None:
    sf = _read_csv(run_dir / "structure_factor.csv")
    manifest = _read_manifest(run_dir / "manifest.txt")
    n_s = int(manifest.get("config.n_s", 4))
    pi_idx = n_s // 2
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    pos = sf["t"] > 0
    ax1.semilogx(sf["t"][pos], sf[f"kxx_m{pi_idx}"][pos], label=r"$K^{xx}(\pi)$")
    ax1.semilogx(sf["t"][pos], sf[f"kzz_m{pi_idx}"][pos], label=r"$K^{zz}(\pi)$")
    for axis in ("x", "z"):
        ref0 = manifest.get(f"extra.k{axis}{axis}_0_m{pi_idx}")
        if ref0 is not None:
            ax1.axhline(float(ref0), color="0.8", lw=0.8)
    ax1.set_xlabel("t")
    ax1.set_ylabel(r"$K^{aa}(\pi)$")
    ax1.legend()

    # late-time ordering vs the symmetric and staggered-field ground states
    kappas_idx = np.arange(n_s)
    for axis, marker in (("x", "o"), ("z", "s")):
        late = [float(manifest[f"extra.k{axis}{axis}_m{m}_tail_avg"]) for m in kappas_idx]
        ref0 = [float(manifest[f"extra.k{axis}{axis}_0_m{m}"]) for m in kappas_idx]
        refst = [float(manifest[f"extra.k{axis}{axis}_st_m{m}"]) for m in kappas_idx]
        ax2.plot(kappas_idx, late, marker, label=f"$K^{{{axis}{axis}}}$ late")
        ax2.plot(kappas_idx, ref0, "+", color="0.4")
        ax2.plot(kappas_idx, refst, "x", color="0.6")
    ax2.set_xlabel(r"$\kappa$ index ($\kappa = 2\pi m / N_S$)")
    ax2.set_ylabel(r"$K^{aa}(\kappa)$")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_dir, "structure_factor.png", paths)

    eig = _read_csv(run_dir / "eigen_coherence.csv")
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    pos = eig["t"] > 0
    ax.loglog(eig["t"][pos], eig["m_eig_up"][pos], "-", label=r"$\uparrow\uparrow$")
    ax.loglog(eig["t"][pos], eig["m_eig_down"][pos], "--", label=r"$\downarrow\downarrow$")
    ax.set_xlabel("t")
    ax.set_ylabel("eigenbasis coherence")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_dir, "eigen_coherence.png", paths)


def _plot_zeno(run_dir: Path, out_dir: Path, paths: list[Path]) -> None:
    zc = _read_csv(run_dir / "zeno_compare.csv")
    bonds = sorted(
        int(name.rsplit("_", 1)[1])
        for name in zc.dtype.names
        if name.startswith("dec_bond_")
    )
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), sharey=True)
    half = (len(bonds) + 1) // 2
    for ax, group in zip(axes, (bonds[:half], bonds[half:])):
        for i in group:
            (line,) = ax.plot(zc["t"], zc[f"col_bond_{i}"], "-", label=f"bond {i}")
            ax.plot(
                zc["t"], zc[f"dec_bond_{i}"], "o", ms=2.5,
                color=line.get_color(), alpha=0.6,
            )
        ax.set_xlabel("t")
        ax.legend(fontsize=8)
    axes[0].set_ylabel(r"$\langle S_i\cdot S_{i+1}\rangle - \langle\cdot\rangle_0$")
    fig.tight_layout()
    _save(fig, out_dir, "zeno_compare.png", paths)


def _plot_gs_report(run_dir: Path, out_dir: Path, paths: list[Path]) -> None:
    rows = np.genfromtxt(
        run_dir / "ground_state.csv", delimiter=",", names=True, dtype=None,
        encoding="utf-8",
    )
    if rows.ndim == 0:
        rows = rows.reshape(1)
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for geometry, marker in (("open", "o"), ("ring", "s")):
        sel = (rows["geometry"] == geometry) & (rows["quantity"] == "bond_corr")
        ax.plot(rows["index"][sel], rows["value"][sel], marker + "-", label=geometry)
    ax.set_xlabel("bond")
    ax.set_ylabel(r"$\langle S_i\cdot S_{i+1}\rangle$")
    ax.legend()
    fig.tight_layout()
    _save(fig, out_dir, "ground_state.png", paths)


_RENDERERS = {
    "model_a": _plot_model_a,
    "model_b": _plot_model_b,
    "zeno_compare": _plot_zeno,
    "ground_state_report": _plot_gs_report,
}


def render_run(run_dir, out_dir=None) -> list[Path]:
    """Render the standard figures for a run directory; returns file paths."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.txt"
    if not manifest_path.exists():
        raise ConfigurationError(f"no manifest.txt in {run_dir}")
    manifest = _read_manifest(manifest_path)
    model = manifest.get("config.model")
    if model not in _RENDERERS:
        raise ConfigurationError(f"manifest declares unknown model {model!r}")
    out = Path(out_dir) if out_dir is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    _RENDERERS[model](run_dir, out, paths)
    return paths
