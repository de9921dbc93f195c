"""Signature corpora: SVC2004 text files, generic CSV, and a seeded synthetic generator.

SVC2004 files start with a point count followed by one whitespace-separated
row per point, either 7 columns ``x y t button azimuth altitude pressure``
or 4 columns ``x y t button``.  Directories hold ``U<user>S<sample>.TXT``.

Generic CSV has the header ``x,y,pressure,azimuth,altitude,t`` and an
optional trailing ``pen_down`` column.  Corpora on disk use the layout
``<root>/<signer>/<genuine|forgery>/<idx>.csv`` plus ``manifest.json``.
"""

import csv
import json
import logging
import math
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadColumnCount,
    EmptyDataset,
    HeaderMismatch,
    NonNumericField,
    NotEnoughSamples,
    ParseError,
    UnparsableFile,
    ValidationError,
)
from .signals import Label, RawSignature, SamplePoint, validate

log = logging.getLogger(__name__)

CSV_COLUMNS = ("x", "y", "pressure", "azimuth", "altitude", "t")
DEFAULT_SPACING_MS = 10.0
SVC_NAME = re.compile(r"^U(\d+)S(\d+)\.TXT$", re.IGNORECASE)


@dataclass(frozen=True)
class SignerRecord:
    signer_id: str
    genuine: tuple
    forgeries: tuple = ()


@dataclass(frozen=True)
class DatasetDescriptor:
    root: str
    format: str
    signers: tuple
    skipped: tuple = ()

    def signer(self, signer_id: str) -> SignerRecord:
        for s in self.signers:
            if s.signer_id == signer_id:
                return s
        raise KeyError(signer_id)


def _fix_timestamps(t: list) -> list:
    # missing or constant timing: fall back to uniform 10 ms spacing
    if len(t) < 2 or all(v == t[0] for v in t):
        return [i * DEFAULT_SPACING_MS for i in range(len(t))]
    return t


def _number(token: str, path, line: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise NonNumericField(f"non-numeric field {token!r}", path, line) from None
    if not math.isfinite(v):
        raise NonNumericField(f"non-finite field {token!r}", path, line)
    return v


def parse_svc2004_text(text: str, *, path=None, signer_id="unknown", sample_index=1, label=Label.GENUINE):
    lines = [ln for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise HeaderMismatch("empty file", path, 1)
    try:
        count = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise NonNumericField(f"bad point count {lines[0]!r}", path, 1) from None
    body = lines[1:]
    if count != len(body):
        raise HeaderMismatch(f"header says {count} points, found {len(body)} data lines", path, 1)
    rows = []
    for k, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) not in (4, 7):
            raise BadColumnCount(f"expected 4 or 7 columns, got {len(parts)}", path, k)
        vals = [_number(p, path, k) for p in parts]
        if len(vals) == 4:
            vals += [0.0, 0.0, 0.0]
        rows.append(vals)
    t = _fix_timestamps([r[2] for r in rows])
    points = tuple(
        SamplePoint(x=r[0], y=r[1], t=ti, pressure=r[6], azimuth=r[4], altitude=r[5], pen_down=r[3] > 0)
        for r, ti in zip(rows, t)
    )
    return validate(RawSignature(str(signer_id), int(sample_index), label, points, "svc2004"))


def parse_svc2004_file(path, *, signer_id=None, sample_index=None, label=Label.GENUINE) -> RawSignature:
    path = Path(path)
    m = SVC_NAME.match(path.name)
    if signer_id is None:
        signer_id = m.group(1) if m else path.stem
    if sample_index is None:
        sample_index = int(m.group(2)) if m else 1
    text = path.read_text(encoding="ascii", errors="replace")
    return parse_svc2004_text(text, path=str(path), signer_id=signer_id, sample_index=sample_index, label=label)


def _num_str(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def format_svc2004(sig: RawSignature, columns: int = 7) -> str:
    out = [str(len(sig.points))]
    for p in sig.points:
        row = [p.x, p.y, p.t, 1.0 if p.pen_down else 0.0]
        if columns == 7:
            row += [p.azimuth, p.altitude, p.pressure]
        out.append(" ".join(_num_str(v) for v in row))
    return "\n".join(out) + "\n"


def parse_csv_text(text: str, *, path=None, signer_id="unknown", sample_index=1, label=Label.GENUINE, source="csv"):
    reader = csv.reader(text.splitlines())
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise HeaderMismatch("empty file", path, 1) from None
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise HeaderMismatch(f"missing columns {missing}; header {header}", path, 1)
    idx = {c: header.index(c) for c in header}
    rows = []
    for k, parts in enumerate(reader, start=2):
        if not parts or all(not p.strip() for p in parts):
            continue
        if len(parts) != len(header):
            raise BadColumnCount(f"expected {len(header)} columns, got {len(parts)}", path, k)
        rows.append({c: _number(parts[i], path, k) for c, i in idx.items()})
    t = _fix_timestamps([r["t"] for r in rows])
    points = tuple(
        SamplePoint(
            x=r["x"],
            y=r["y"],
            t=ti,
            pressure=r["pressure"],
            azimuth=r["azimuth"],
            altitude=r["altitude"],
            pen_down=r.get("pen_down", 1.0) > 0,
        )
        for r, ti in zip(rows, t)
    )
    return validate(RawSignature(str(signer_id), int(sample_index), label, points, source))


def parse_csv_file(path, **kw) -> RawSignature:
    path = Path(path)
    return parse_csv_text(path.read_text(encoding="utf-8"), path=str(path), **kw)


def format_csv(sig: RawSignature) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for p in sig.points:
        lines.append(",".join(_num_str(getattr(p, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def read_signature(path, **kw) -> RawSignature:
    """Parse by extension: ``.csv`` as generic CSV, anything else as SVC2004."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return parse_csv_file(path, **kw)
    return parse_svc2004_file(path, **kw)


def _signer_sort_key(sid: str):
    return (0, int(sid), sid) if sid.isdigit() else (1, 0, sid)


def scan_svc2004_dir(root, genuine_per_user: int = 20) -> DatasetDescriptor:
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"{root} is not a directory")
    groups: dict = {}
    offenders = []
    n_files = 0
    for path in sorted(root.iterdir()):
        if not path.is_file():
            continue
        m = SVC_NAME.match(path.name)
        if not m:
            log.warning("ignoring %s: name does not match U<user>S<sample>.TXT", path.name)
            continue
        n_files += 1
        user, sample = m.group(1), int(m.group(2))
        label = Label.GENUINE if sample <= genuine_per_user else Label.FORGERY
        try:
            sig = parse_svc2004_file(path, signer_id=user, sample_index=sample, label=label)
        except (ParseError, ValidationError) as exc:
            offenders.append((str(path), str(exc)))
            log.warning("skipping %s", exc)
            continue
        groups.setdefault(user, []).append(sig)
    if n_files == 0:
        raise EmptyDataset(f"no U<user>S<sample>.TXT files in {root}")
    signers = []
    for user in sorted(groups, key=_signer_sort_key):
        sigs = sorted(groups[user], key=lambda s: s.sample_index)
        gen = tuple(s for s in sigs if s.label is Label.GENUINE)
        forg = tuple(s for s in sigs if s.label is Label.FORGERY)
        if gen:
            signers.append(SignerRecord(user, gen, forg))
    if not signers:
        raise UnparsableFile(f"no usable signer in {root}", offenders)
    return DatasetDescriptor(str(root), "svc2004", tuple(signers), tuple(offenders))


def scan_csv_dir(root) -> DatasetDescriptor:
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"{root} is not a directory")
    signers = []
    offenders = []
    for sdir in sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: _signer_sort_key(p.name)):
        parts = {}
        for label in Label:
            sigs = []
            ldir = sdir / label.value
            files = sorted(ldir.glob("*.csv"), key=lambda p: _signer_sort_key(p.stem)) if ldir.is_dir() else []
            for i, f in enumerate(files, start=1):
                idx = int(f.stem) if f.stem.isdigit() else i
                try:
                    sigs.append(parse_csv_file(f, signer_id=sdir.name, sample_index=idx, label=label))
                except (ParseError, ValidationError) as exc:
                    offenders.append((str(f), str(exc)))
                    log.warning("skipping %s", exc)
            parts[label] = tuple(sigs)
        if parts[Label.GENUINE]:
            signers.append(SignerRecord(sdir.name, parts[Label.GENUINE], parts[Label.FORGERY]))
    if not signers:
        if offenders:
            raise UnparsableFile(f"no usable signer in {root}", offenders)
        raise EmptyDataset(f"no <signer>/genuine/*.csv files under {root}")
    return DatasetDescriptor(str(root), "csv", tuple(signers), tuple(offenders))


def load_dataset(root, fmt: str = "csv", genuine_per_user: int = 20) -> DatasetDescriptor:
    fmt = fmt.lower()
    if fmt == "svc2004":
        return scan_svc2004_dir(root, genuine_per_user)
    if fmt in ("csv", "synthetic"):
        return scan_csv_dir(root)
    raise ValueError(f"unknown dataset format {fmt!r}")


# ---------------------------------------------------------------------------
# synthetic corpus

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 output for ``state`` (already advanced by the caller)."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(*parts: int) -> int:
    key = 0
    for p in parts:
        key = splitmix64(key ^ (int(p) & _MASK64))
    return key


def _rng(*parts: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(stream_key(*parts)))


@dataclass(frozen=True)
class SynthParams:
    seed: int = 42
    n_signers: int = 10
    n_genuine: int = 20
    n_forgery: int = 20
    n_points: int = 200
    distortion: float = 0.3

    def __post_init__(self):
        for name in ("n_signers", "n_genuine", "n_forgery", "n_points"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if not 0.0 <= self.distortion <= 1.0:
            raise ValueError(f"distortion must be in [0, 1], got {self.distortion}")


_TEMPLATE, _GENUINE, _FORGERY = 0, 1, 2
_JITTER_AMP = 0.03
_JITTER_PHASE = 0.06
_JITTER_WARP = 0.02
_NOISE = 0.01


@dataclass(frozen=True)
class _Template:
    amp: np.ndarray  # (2, 3) x/y harmonic amplitudes
    freq: np.ndarray
    phase: np.ndarray
    p_peak: float
    p_center: float
    p_width: float
    az: tuple
    alt: tuple


def _template(seed: int, signer: int) -> _Template:
    rng = _rng(seed, signer, _TEMPLATE)
    return _Template(
        amp=rng.uniform(0.4, 1.6, size=(2, 3)) * np.array([[1.0], [0.6]]),
        freq=np.sort(rng.uniform(0.5, 4.0, size=(2, 3)), axis=1),
        phase=rng.uniform(0.0, 2.0 * np.pi, size=(2, 3)),
        p_peak=float(rng.uniform(0.5, 1.0)),
        p_center=float(rng.uniform(0.35, 0.65)),
        p_width=float(rng.uniform(0.2, 0.4)),
        az=(float(rng.uniform(30.0, 80.0)), float(rng.uniform(-10.0, 10.0))),
        alt=(float(rng.uniform(40.0, 70.0)), float(rng.uniform(-8.0, 8.0))),
    )


def _render(tpl: _Template, rng: np.random.Generator, n_points: int, distortion: float) -> np.ndarray:
    """Columns x, y, pressure, azimuth, altitude for one sample."""
    d = distortion
    u = np.linspace(0.0, 1.0, n_points)
    # time warp: a smooth monotone reparametrization
    warp_amp = _JITTER_WARP * rng.standard_normal() + d * 0.12 * rng.uniform(-1.0, 1.0)
    s = np.clip(u + warp_amp * np.sin(np.pi * u), 0.0, 1.0)
    amp = tpl.amp * (1.0 + _JITTER_AMP * rng.standard_normal(tpl.amp.shape) + d * rng.uniform(-0.8, 0.8, tpl.amp.shape))
    phase = tpl.phase + _JITTER_PHASE * rng.standard_normal(tpl.phase.shape) + d * rng.uniform(-1.5, 1.5, tpl.phase.shape)
    freq = tpl.freq * (1.0 + d * 0.25 * rng.uniform(-1.0, 1.0, tpl.freq.shape))
    xy = np.einsum("ch,chn->cn", amp, np.sin(2.0 * np.pi * freq[:, :, None] * s[None, None, :] + phase[:, :, None]))
    xy += _NOISE * rng.standard_normal(xy.shape)
    center = tpl.p_center + d * 0.15 * rng.uniform(-1.0, 1.0)
    width = tpl.p_width * (1.0 + d * 0.5 * rng.uniform(-1.0, 1.0))
    peak = tpl.p_peak * (1.0 + 0.03 * rng.standard_normal() + d * 0.5 * rng.uniform(-1.0, 1.0))
    pressure = np.maximum(peak * np.exp(-(((s - center) / width) ** 2)) + 0.05 + 0.005 * rng.standard_normal(n_points), 0.0)
    az0, az1 = tpl.az
    alt0, alt1 = tpl.alt
    drift = 1.0 + d * rng.uniform(-1.0, 1.0)
    azimuth = az0 + az1 * drift * s + 0.5 * rng.standard_normal()
    altitude = alt0 + alt1 * drift * np.sin(np.pi * s) + 0.5 * rng.standard_normal()
    # tablet-like units
    return np.stack([1000.0 * xy[0] + 5000.0, 1000.0 * xy[1] + 3000.0, 1000.0 * pressure, azimuth, altitude], axis=1)


def _to_signature(cols: np.ndarray, signer_id: str, index: int, label: Label) -> RawSignature:
    cols = np.round(cols, 3)
    pts = tuple(
        SamplePoint(
            x=float(r[0]), y=float(r[1]), t=DEFAULT_SPACING_MS * i, pressure=float(r[2]),
            azimuth=float(r[3]), altitude=float(r[4]), pen_down=True,
        )
        for i, r in enumerate(cols)
    )
    return RawSignature(signer_id, index, label, pts, "synthetic")


def generate_synthetic(params: SynthParams) -> DatasetDescriptor:
    """Deterministic corpus of sinusoidal pen trajectories.

    Each signer has a template of three x and three y harmonics, a
    bell-shaped pressure profile and slowly drifting pen angles.  Genuine
    samples add small jitter; forgeries additionally perturb amplitudes,
    phases, frequencies and timing by an amount proportional to
    ``params.distortion``.  Every sample draws from its own PCG64 stream
    keyed by splitmix64 over ``(seed, signer, kind, sample)``.
    """
    signers = []
    width = max(2, len(str(params.n_signers)))
    for s in range(params.n_signers):
        sid = f"s{s + 1:0{width}d}"
        tpl = _template(params.seed, s)
        gen = tuple(
            _to_signature(_render(tpl, _rng(params.seed, s, _GENUINE, i), params.n_points, 0.0), sid, i + 1, Label.GENUINE)
            for i in range(params.n_genuine)
        )
        forg = tuple(
            _to_signature(
                _render(tpl, _rng(params.seed, s, _FORGERY, i), params.n_points, params.distortion),
                sid,
                i + 1,
                Label.FORGERY,
            )
            for i in range(params.n_forgery)
        )
        signers.append(SignerRecord(sid, gen, forg))
    return DatasetDescriptor("", "synthetic", tuple(signers))


def write_corpus(ds: DatasetDescriptor, out_dir, params: SynthParams | None = None) -> int:
    """Write ``ds`` in the generic CSV layout; returns the number of signature files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    manifest = {"format": "csv", "columns": list(CSV_COLUMNS), "signers": []}
    if params is not None:
        manifest["synth_params"] = asdict(params)
    for rec in ds.signers:
        entry = {"signer_id": rec.signer_id, "genuine": [], "forgery": []}
        for label, sigs in ((Label.GENUINE, rec.genuine), (Label.FORGERY, rec.forgeries)):
            d = out / rec.signer_id / label.value
            d.mkdir(parents=True, exist_ok=True)
            for sig in sigs:
                name = f"{sig.sample_index:03d}.csv"
                (d / name).write_text(format_csv(sig), encoding="utf-8")
                entry[label.value].append(f"{rec.signer_id}/{label.value}/{name}")
                n += 1
        manifest["signers"].append(entry)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return n


# ---------------------------------------------------------------------------
# train / test split


@dataclass(frozen=True)
class Split:
    train_genuine: tuple
    train_forgery: tuple
    test_genuine: tuple
    test_forgery: tuple = field(default=())


def split(record: SignerRecord, n_train_genuine: int, n_train_forgery: int, seed: int = 0) -> Split:
    """Seeded shuffle then cut.  At least one genuine sample always stays in test,
    and one forgery when the record has any."""
    gen, forg = list(record.genuine), list(record.forgeries)
    if n_train_genuine < 1 or n_train_genuine >= len(gen):
        raise NotEnoughSamples(
            f"signer {record.signer_id}: {n_train_genuine} training genuine requested, "
            f"{len(gen)} available (need 1 <= n < {len(gen)})"
        )
    if forg:
        if n_train_forgery < 0 or n_train_forgery >= len(forg):
            raise NotEnoughSamples(
                f"signer {record.signer_id}: {n_train_forgery} training forgeries requested, "
                f"{len(forg)} available (need n < {len(forg)})"
            )
    elif n_train_forgery > 0:
        raise NotEnoughSamples(f"signer {record.signer_id} has no forgeries to train on")
    rng = _rng(seed, stream_key(*record.signer_id.encode()), 3)
    gi = rng.permutation(len(gen))
    fi = rng.permutation(len(forg)) if forg else np.array([], dtype=int)
    return Split(
        tuple(gen[i] for i in gi[:n_train_genuine]),
        tuple(forg[i] for i in fi[:n_train_forgery]),
        tuple(gen[i] for i in gi[n_train_genuine:]),
        tuple(forg[i] for i in fi[n_train_forgery:]),
    )
