"""Parameter extraction from simulated maps.

Closes the loop between the sweeps and the capacitance model: peak loci
are detected row by row and chained into lines, line slopes are clustered
into the two island families, blockade-diamond edges are fitted for
slopes and height, and honeycomb vertices are located on ground-state
maps to measure the triple-point splitting.  Every fitted quantity
carries an uncertainty, and reports can place the closed-form model
predictions beside the measured numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .device import DeviceSpec, anticrossing_shift, backgate_slope, charging_energy, \
    diamond_slopes, lever_arm, peak_spacing
from .errors import ExtractionError
from .sweep import ConductanceMap, GroundStateMap

FAMILY_DONOR = "donor"
FAMILY_DOT = "dot"
FAMILY_UNASSIGNED = "unassigned"


# ---------------------------------------------------------------------------
# peak detection and locus tracking

@dataclass(frozen=True)
class PeakPoint:
    """One interpolated local maximum: scan-axis position at a row value."""

    row_value: float
    position: float
    height: float


@dataclass
class PeakLocus:
    """A chain of peaks tracked across rows, tagged with its island family."""

    points: list[PeakPoint]
    family: str = FAMILY_UNASSIGNED

    def __len__(self):
        return len(self.points)

    def fit_line(self) -> tuple[float, float, float]:
        """Least-squares (slope, intercept, slope stderr) of position vs row."""
        x = np.array([p.row_value for p in self.points])
        y = np.array([p.position for p in self.points])
        n = x.size
        if n < 2:
            raise ExtractionError("need at least 2 points to fit a locus")
        sxx = float(np.sum((x - x.mean()) ** 2))
        if sxx == 0.0:
            raise ExtractionError("degenerate locus: all points share one row")
        slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
        intercept = float(y.mean() - slope * x.mean())
        if n > 2:
            residual = y - (slope * x + intercept)
            stderr = math.sqrt(float(np.sum(residual**2)) / (n - 2) / sxx)
        else:
            stderr = 0.0
        return slope, intercept, stderr


def _parabolic_refine(x, y, i):
    """Sub-grid peak position/height from the 3 samples around index i."""
    step = x[1] - x[0]
    ym1, y0, yp1 = y[i - 1], y[i], y[i + 1]
    denom = ym1 - 2.0 * y0 + yp1
    if denom >= 0.0:
        return x[i], y0
    shift = 0.5 * (ym1 - yp1) / denom
    return x[i] + shift * step, y0 - 0.25 * (ym1 - yp1) * shift


def _row_peaks(x, y, floor):
    """Interpolated local maxima of y(x) above `floor`, in ascending x."""
    peaks = []
    for i in range(1, y.size - 1):
        if y[i] > y[i - 1] and y[i] >= y[i + 1] and y[i] > floor:
            pos, height = _parabolic_refine(x, y, i)
            peaks.append((pos, height))
    return peaks


def detect_peaks(
    cmap: ConductanceMap,
    axis: int = 1,
    noise_factor: float = 10.0,
    min_height: float | None = None,
    max_jump_steps: float = 3.0,
    max_row_gap: int = 2,
) -> list[PeakLocus]:
    """Track conductance/current peaks along one axis into loci.

    Rows are the grid lines of the *other* axis; per row, local maxima
    above the noise floor (``min_height`` if given, else ``noise_factor``
    times the median absolute map value) are refined by parabolic
    interpolation, then linked across rows by nearest-position matching
    within ``max_jump_steps`` grid steps per row (rows may be skipped up
    to ``max_row_gap``).  An empty result is not an error.
    """
    if cmap.plan.observable == "log10_conductance":
        raise ExtractionError(
            "peak detection runs on current/conductance maps; undo the log first"
        )
    if axis == 1:
        values = cmap.values
        scan_values = cmap.axis1_values()
        row_values = cmap.axis2_values()
    elif axis == 2:
        values = cmap.values.T
        scan_values = cmap.axis2_values()
        row_values = cmap.axis1_values()
    else:
        raise ValueError("axis must be 1 or 2")

    floor = (
        float(min_height)
        if min_height is not None
        else noise_factor * float(np.median(np.abs(values)))
    )
    step = abs(scan_values[1] - scan_values[0])

    finished: list[PeakLocus] = []
    open_chains: list[dict] = []
    for j, row_value in enumerate(row_values):
        peaks = _row_peaks(scan_values, values[:, j], floor)
        # close chains that fell too far behind
        still_open = []
        for chain in open_chains:
            if j - chain["last_row"] > max_row_gap:
                finished.append(PeakLocus(points=chain["points"]))
            else:
                still_open.append(chain)
        open_chains = still_open

        # match against linearly extrapolated chain positions so that two
        # lines crossing each other keep their identities
        candidates = []
        for ci, chain in enumerate(open_chains):
            gap = j - chain["last_row"]
            predicted = chain["last_pos"] + chain["velocity"] * gap
            for pi, (pos, _) in enumerate(peaks):
                distance = abs(pos - predicted)
                if distance <= max_jump_steps * step * gap:
                    candidates.append((distance, ci, pi))
        candidates.sort()
        used_chains, used_peaks = set(), set()
        for distance, ci, pi in candidates:
            if ci in used_chains or pi in used_peaks:
                continue
            used_chains.add(ci)
            used_peaks.add(pi)
            pos, height = peaks[pi]
            chain = open_chains[ci]
            gap = j - chain["last_row"]
            chain["velocity"] = (pos - chain["last_pos"]) / gap
            chain["points"].append(PeakPoint(row_value, pos, height))
            chain["last_pos"] = pos
            chain["last_row"] = j
        for pi, (pos, height) in enumerate(peaks):
            if pi not in used_peaks:
                open_chains.append(
                    {
                        "points": [PeakPoint(row_value, pos, height)],
                        "last_pos": pos,
                        "last_row": j,
                        "velocity": 0.0,
                    }
                )
    finished.extend(PeakLocus(points=chain["points"]) for chain in open_chains)
    finished.sort(key=lambda locus: (locus.points[0].row_value, locus.points[0].position))
    return finished


# ---------------------------------------------------------------------------
# family clustering

@dataclass(frozen=True)
class FamilyFit:
    """Averaged slope of one cluster of loci."""

    label: str
    slope: float
    stderr: float
    n_loci: int


def _two_means(slopes: np.ndarray) -> np.ndarray | None:
    """Deterministic 2-means on a 1-d array; returns labels or None if one cluster."""
    lo, hi = float(slopes.min()), float(slopes.max())
    if hi - lo < max(0.05 * float(np.mean(np.abs(slopes))), 1e-12):
        return None
    c0, c1 = lo, hi
    labels = np.zeros(slopes.size, dtype=int)
    for _ in range(100):
        new_labels = (np.abs(slopes - c1) < np.abs(slopes - c0)).astype(int)
        if not new_labels.any() or new_labels.all():
            return None
        if (new_labels == labels).all() and _ > 0:
            break
        labels = new_labels
        c0 = float(slopes[labels == 0].mean())
        c1 = float(slopes[labels == 1].mean())
    return labels


def fit_family_slopes(loci: list[PeakLocus], min_points: int = 3) -> list[FamilyFit]:
    """Cluster loci into (at most) two slope families and average each.

    Loci shorter than ``min_points`` are ignored.  The steeper family is
    labelled "donor" and the shallower "dot" (the donor couples relatively
    harder to the back gate); with a single distinguishable cluster one
    unassigned family is returned.  Mutates the loci's family tags.
    """
    usable = [locus for locus in loci if len(locus) >= min_points]
    if not usable:
        raise ExtractionError("no locus has enough points for a slope fit")
    fits = [locus.fit_line() for locus in usable]
    slopes = np.array([f[0] for f in fits])
    stderrs = np.array([f[2] for f in fits])

    def family(indices, label):
        s = slopes[indices]
        se = stderrs[indices]
        combined = math.sqrt(float(np.sum(se**2))) / len(indices)
        if len(indices) > 1:
            scatter = float(np.std(s, ddof=1)) / math.sqrt(len(indices))
            combined = max(combined, scatter)
        return FamilyFit(label, float(np.mean(s)), combined, len(indices))

    labels = _two_means(slopes)
    if labels is None:
        for locus in usable:
            locus.family = FAMILY_UNASSIGNED
        return [family(np.arange(slopes.size), FAMILY_UNASSIGNED)]
    mean0 = abs(float(slopes[labels == 0].mean()))
    mean1 = abs(float(slopes[labels == 1].mean()))
    donor_label = 0 if mean0 >= mean1 else 1
    names = {donor_label: FAMILY_DONOR, 1 - donor_label: FAMILY_DOT}
    for locus, lab in zip(usable, labels):
        locus.family = names[int(lab)]
    return [
        family(np.nonzero(labels == donor_label)[0], FAMILY_DONOR),
        family(np.nonzero(labels != donor_label)[0], FAMILY_DOT),
    ]


def family_spacings(loci: list[PeakLocus], row_value: float) -> dict[str, float]:
    """Mean gap between adjacent same-family lines, evaluated at `row_value`."""
    spacings = {}
    for label in (FAMILY_DONOR, FAMILY_DOT, FAMILY_UNASSIGNED):
        members = [locus for locus in loci if locus.family == label and len(locus) >= 3]
        if len(members) < 2:
            continue
        positions = sorted(
            slope * row_value + intercept
            for slope, intercept, _ in (locus.fit_line() for locus in members)
        )
        gaps = np.diff(positions)
        spacings[label] = float(np.mean(gaps))
    return spacings


# ---------------------------------------------------------------------------
# diamond fitting

@dataclass(frozen=True)
class DiamondFit:
    """Edge slopes and apex height of one blockade diamond."""

    positive_slope: float
    negative_slope: float
    positive_stderr: float
    negative_stderr: float
    height_mv: float
    height_stderr: float
    gate_left: float
    gate_right: float
    flags: tuple[str, ...] = ()

    @property
    def lever_arm(self) -> float:
        """Gate lever arm implied by the two edge slopes."""
        beta_p = self.positive_slope
        beta_n = abs(self.negative_slope)
        return beta_p * beta_n / (beta_p + beta_n)

    @property
    def charging_energy_mev(self) -> float:
        """Addition energy implied by the apex height (numerically = height)."""
        return self.height_mv


def _line_lsq(points):
    """(slope, intercept, slope stderr, residual rms) of d vs x."""
    x = np.array([p[0] for p in points])
    d = np.array([p[1] for p in points])
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise ExtractionError("degenerate edge: no gate-voltage spread")
    slope = float(np.sum((x - x.mean()) * (d - d.mean())) / sxx)
    intercept = float(d.mean() - slope * x.mean())
    residual = d - (slope * x + intercept)
    n = x.size
    stderr = math.sqrt(float(np.sum(residual**2)) / (n - 2) / sxx) if n > 2 else 0.0
    rms = math.sqrt(float(np.mean(residual**2)))
    return slope, intercept, stderr, rms


def _fit_half(points, left_anchor, right_anchor, iterations=4):
    """Split edge points into the two lines meeting at the apex; fit both.

    Returns ((left fit), (right fit), apex_x, apex_d) or None when a side
    has too few points.  The split abscissa is refined from the running
    intersection of the two fitted lines.
    """
    split = 0.5 * (left_anchor + right_anchor)
    result = None
    for _ in range(iterations):
        left = [p for p in points if p[0] <= split]
        right = [p for p in points if p[0] > split]
        if len(left) < 3 or len(right) < 3:
            return result
        fit_l = _line_lsq(left)
        fit_r = _line_lsq(right)
        if fit_l[0] == fit_r[0]:
            return result
        apex_x = (fit_r[1] - fit_l[1]) / (fit_l[0] - fit_r[0])
        apex_d = fit_l[0] * apex_x + fit_l[1]
        result = (fit_l, fit_r, apex_x, apex_d)
        split = min(max(apex_x, left_anchor), right_anchor)
    return result


def fit_diamond(
    cmap: ConductanceMap,
    transition: int = 0,
    noise_factor: float = 10.0,
    bias_exclude_mv: float | None = None,
) -> DiamondFit:
    """Fit the four edges of the blockade diamond after zero-bias peak #transition.

    The map must sweep v_gate on axis1 and v_drain on axis2 and span the
    diamond between zero-bias peaks ``transition`` and ``transition + 1``.
    Edge points are conductance maxima per drain-voltage row; rows with
    |v_drain| below ``bias_exclude_mv`` (default: two grid steps) are
    skipped because the two window edges are not yet resolved there.  An
    incomplete diamond yields a partial fit with explanatory flags.
    """
    if cmap.plan.axis1.name != "v_gate" or cmap.plan.axis2.name != "v_drain":
        raise ExtractionError("diamond fits need axis1=v_gate, axis2=v_drain")
    if cmap.plan.observable == "log10_conductance":
        raise ExtractionError("diamond fits run on linear conductance maps")
    gate = cmap.axis1_values()
    drain = cmap.axis2_values()
    values = cmap.values
    floor = noise_factor * float(np.median(np.abs(values)))
    drain_step = abs(drain[1] - drain[0])

    j0 = int(np.argmin(np.abs(drain)))
    base = _row_peaks(gate, values[:, j0], floor)
    if len(base) < transition + 2:
        raise ExtractionError(
            f"zero-bias row shows {len(base)} peaks; diamond {transition} needs "
            f"{transition + 2}"
        )
    v_left = base[transition][0]
    v_right = base[transition + 1][0]

    band = 2.0 * drain_step if bias_exclude_mv is None else float(bias_exclude_mv)
    upper_pts, lower_pts = [], []
    for j, d in enumerate(drain):
        if abs(d) <= band:
            continue
        for pos, _ in _row_peaks(gate, values[:, j], floor):
            if v_left <= pos <= v_right:
                (upper_pts if d > 0 else lower_pts).append((pos, d))

    flags = []
    upper = _fit_half(upper_pts, v_left, v_right)
    lower = _fit_half(lower_pts, v_left, v_right)
    if upper is None and lower is None:
        raise ExtractionError("too few edge points on both bias sides")
    if upper is None:
        flags.append("upper_half_missing")
    if lower is None:
        flags.append("lower_half_missing")

    pos_fits, neg_fits = [], []
    heights = []
    if upper is not None:
        fit_l, fit_r, _, apex_d = upper
        pos_fits.append(fit_l)   # roof left edge rises from the left vertex
        neg_fits.append(fit_r)
        heights.append((apex_d, max(fit_l[3], fit_r[3])))
        if apex_d > drain.max():
            flags.append("upper_apex_extrapolated")
    if lower is not None:
        fit_l, fit_r, _, apex_d = lower
        neg_fits.append(fit_l)   # floor left edge falls from the left vertex
        pos_fits.append(fit_r)
        heights.append((-apex_d, max(fit_l[3], fit_r[3])))
        if apex_d < drain.min():
            flags.append("lower_apex_extrapolated")

    def combine(fits):
        slopes = np.array([f[0] for f in fits])
        errors = np.array([f[2] for f in fits])
        return float(np.mean(slopes)), float(
            math.sqrt(float(np.sum(errors**2))) / len(fits)
        )

    positive_slope, positive_stderr = combine(pos_fits)
    negative_slope, negative_stderr = combine(neg_fits)
    height = float(np.mean([h for h, _ in heights]))
    height_stderr = float(math.sqrt(sum(se**2 for _, se in heights)) / len(heights))
    return DiamondFit(
        positive_slope=positive_slope,
        negative_slope=negative_slope,
        positive_stderr=positive_stderr,
        negative_stderr=negative_stderr,
        height_mv=height,
        height_stderr=height_stderr,
        gate_left=v_left,
        gate_right=v_right,
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# honeycomb vertex geometry

@dataclass(frozen=True)
class TripleJunction:
    """Meeting point of three (or four) charge regions on a ground-state map."""

    position: tuple[float, float]
    labels: frozenset
    cells: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class VertexSplitting:
    """Gate-voltage separation of the two triple points of one vertex."""

    splitting_mv: float
    coincident: bool
    quadruple: tuple[int, int]
    tp_lower: tuple[float, float]
    tp_upper: tuple[float, float]


def find_triple_junctions(gsmap: GroundStateMap) -> list[TripleJunction]:
    """Locate 2x2 blocks where at least three charge regions meet.

    Adjacent candidate blocks with the same label set are merged; each
    junction's position is the centroid of its blocks' corner points.
    """
    codes = gsmap.n_donor * 1_000_000 + gsmap.m_dot
    ax1 = gsmap.axis1_values()
    ax2 = gsmap.axis2_values()
    s1, s2 = codes.shape
    blocks = {}
    for i in range(s1 - 1):
        for j in range(s2 - 1):
            quad = {
                int(codes[i, j]),
                int(codes[i + 1, j]),
                int(codes[i, j + 1]),
                int(codes[i + 1, j + 1]),
            }
            if len(quad) >= 3:
                blocks.setdefault(frozenset(quad), []).append((i, j))

    junctions = []
    for labels, cells in blocks.items():
        decoded = frozenset((code // 1_000_000, code % 1_000_000) for code in labels)
        clusters: list[list[tuple[int, int]]] = []
        for cell in sorted(cells):
            for cluster in clusters:
                if any(
                    abs(cell[0] - c[0]) <= 2 and abs(cell[1] - c[1]) <= 2
                    for c in cluster
                ):
                    cluster.append(cell)
                    break
            else:
                clusters.append([cell])
        for cluster in clusters:
            xs = [0.5 * (ax1[i] + ax1[i + 1]) for i, _ in cluster]
            ys = [0.5 * (ax2[j] + ax2[j + 1]) for _, j in cluster]
            junctions.append(
                TripleJunction(
                    position=(float(np.mean(xs)), float(np.mean(ys))),
                    labels=decoded,
                    cells=tuple(cluster),
                )
            )
    junctions.sort(key=lambda jn: jn.position)
    return junctions


def vertex_splitting(gsmap: GroundStateMap, coincide_steps: float = 1.5) -> VertexSplitting:
    """Measure the triple-point splitting along v_gate on a ground-state map.

    For a charge quadruple (n,m)/(n+1,m)/(n,m+1)/(n+1,m+1) the lower
    triple point joins the first three regions and the upper one the last
    three.  Their v_gate separation is returned; separations below
    ``coincide_steps`` grid steps (the plain-crossing case, e.g. zero
    mutual capacitance) report as exactly 0 with the coincident flag.
    The map must contain exactly one such vertex pair.
    """
    junctions = find_triple_junctions(gsmap)
    if not junctions:
        raise ExtractionError("ground-state map contains no region junction")
    if gsmap.plan.axis1.name == "v_gate":
        gate_index, gate_step = 0, abs(gsmap.plan.axis1.step)
    elif gsmap.plan.axis2.name == "v_gate":
        gate_index, gate_step = 1, abs(gsmap.plan.axis2.step)
    else:
        raise ExtractionError("vertex splitting needs a v_gate axis")

    pairs = {}
    for junction in junctions:
        anchors = {
            (a - da, b - db)
            for a, b in junction.labels
            for da, db in ((0, 0), (1, 0), (0, 1), (1, 1))
            if a - da >= 0 and b - db >= 0
        }
        for n, m in anchors:
            lower = {(n, m), (n + 1, m), (n, m + 1)}
            upper = {(n + 1, m), (n, m + 1), (n + 1, m + 1)}
            if lower <= junction.labels:
                pairs.setdefault((n, m), {})["lower"] = junction
            if upper <= junction.labels:
                pairs.setdefault((n, m), {})["upper"] = junction
    complete = {
        quad: found for quad, found in pairs.items() if {"lower", "upper"} <= found.keys()
    }
    if not complete:
        raise ExtractionError(
            "no complete triple-point pair found; junctions: "
            + ", ".join(str(sorted(j.labels)) for j in junctions)
        )
    if len(complete) > 1:
        raise ExtractionError(
            f"map contains {len(complete)} vertex pairs {sorted(complete)}; "
            "narrow the window to exactly one"
        )
    (quad, found), = complete.items()
    tp_lower = found["lower"].position
    tp_upper = found["upper"].position
    gap = abs(tp_upper[gate_index] - tp_lower[gate_index])
    other = abs(tp_upper[1 - gate_index] - tp_lower[1 - gate_index])
    if found["lower"] is found["upper"] or (
        gap <= coincide_steps * gate_step and other <= coincide_steps * gate_step * 2
    ):
        return VertexSplitting(0.0, True, quad, tp_lower, tp_upper)
    return VertexSplitting(float(gap), False, quad, tp_lower, tp_upper)


# ---------------------------------------------------------------------------
# conversions and reports

def gate_to_energy(delta_vg: float, alpha: float) -> float:
    """Convert a front-gate voltage span (mV) to island energy (meV)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("lever arm must lie in (0, 1)")
    return alpha * delta_vg


@dataclass
class ExtractionReport:
    """Flat, diffable summary of one extraction run."""

    mode: str
    entries: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def to_text(self) -> str:
        lines = [f"mode = {self.mode}"]
        for key in sorted(self.entries):
            value = self.entries[key]
            if isinstance(value, float):
                lines.append(f"{key} = {value!r}")
            else:
                lines.append(f"{key} = {value}")
        if self.flags:
            lines.append("flags = " + ",".join(self.flags))
        return "\n".join(lines) + "\n"


def _delog(cmap: ConductanceMap) -> ConductanceMap:
    """Return the linear-conductance view of a log10 map (identity otherwise)."""
    if cmap.plan.observable != "log10_conductance":
        return cmap
    linear_plan = replace(cmap.plan, observable="conductance")
    return ConductanceMap(plan=linear_plan, values=10.0**cmap.values, units="e^2/h")


def extract_backgate(cmap: ConductanceMap, device: DeviceSpec | None = None) -> ExtractionReport:
    """Peak families, slopes and spacings from a (gate, back-gate) map."""
    cmap = _delog(cmap)
    loci = detect_peaks(cmap)
    families = fit_family_slopes(loci)
    mid_row = 0.5 * (cmap.plan.axis2.start + cmap.plan.axis2.stop)
    spacings = family_spacings(loci, mid_row)
    report = ExtractionReport(mode="backgate")
    report.entries["n_loci"] = sum(1 for locus in loci if len(locus) >= 3)
    for fit in families:
        report.entries[f"family.{fit.label}.slope"] = fit.slope
        report.entries[f"family.{fit.label}.stderr"] = fit.stderr
        report.entries[f"family.{fit.label}.n_loci"] = fit.n_loci
        if fit.label in spacings:
            report.entries[f"family.{fit.label}.spacing_mv"] = spacings[fit.label]
    if device is not None:
        report.entries["closed_form.donor.backgate_slope"] = backgate_slope(device.donor.caps)
        report.entries["closed_form.dot.backgate_slope"] = backgate_slope(device.dot.caps)
        report.entries["closed_form.donor.peak_spacing_mv"] = peak_spacing(device.donor.caps)
        report.entries["closed_form.dot.peak_spacing_mv"] = peak_spacing(device.dot.caps)
    if len(families) == 1:
        report.flags = ("single_family",)
    return report


def extract_diamond(
    cmap: ConductanceMap, device: DeviceSpec | None = None, transition: int = 0
) -> ExtractionReport:
    """Diamond slopes, height, lever arm and charging energy from a bias map."""
    cmap = _delog(cmap)
    fit = fit_diamond(cmap, transition=transition)
    report = ExtractionReport(mode="diamond", flags=fit.flags)
    report.entries["diamond.transition"] = transition
    report.entries["diamond.positive_slope"] = fit.positive_slope
    report.entries["diamond.positive_stderr"] = fit.positive_stderr
    report.entries["diamond.negative_slope"] = fit.negative_slope
    report.entries["diamond.negative_stderr"] = fit.negative_stderr
    report.entries["diamond.height_mv"] = fit.height_mv
    report.entries["diamond.height_stderr"] = fit.height_stderr
    report.entries["diamond.gate_left_mv"] = fit.gate_left
    report.entries["diamond.gate_right_mv"] = fit.gate_right
    report.entries["diamond.spacing_mv"] = fit.gate_right - fit.gate_left
    report.entries["diamond.lever_arm"] = fit.lever_arm
    report.entries["diamond.charging_energy_mev"] = fit.charging_energy_mev
    if device is not None:
        for label, caps in ((FAMILY_DONOR, device.donor.caps), (FAMILY_DOT, device.dot.caps)):
            pos, neg = diamond_slopes(caps)
            report.entries[f"closed_form.{label}.positive_slope"] = pos
            report.entries[f"closed_form.{label}.negative_slope"] = neg
            report.entries[f"closed_form.{label}.charging_energy_mev"] = charging_energy(caps)
            report.entries[f"closed_form.{label}.lever_arm"] = lever_arm(caps)
    return report


def extract_honeycomb(gsmap: GroundStateMap, device: DeviceSpec | None = None) -> ExtractionReport:
    """Vertex splitting from a ground-state map, beside both closed forms."""
    vertex = vertex_splitting(gsmap)
    report = ExtractionReport(mode="honeycomb")
    report.entries["vertex.splitting_mv"] = vertex.splitting_mv
    report.entries["vertex.quadruple"] = f"{vertex.quadruple[0]},{vertex.quadruple[1]}"
    report.entries["vertex.tp_lower"] = f"{vertex.tp_lower[0]!r},{vertex.tp_lower[1]!r}"
    report.entries["vertex.tp_upper"] = f"{vertex.tp_upper[0]!r},{vertex.tp_upper[1]!r}"
    if vertex.coincident:
        report.flags = ("coincident_triple_points",)
    if device is not None:
        excl = anticrossing_shift(device, include_mutual=False)
        incl = anticrossing_shift(device, include_mutual=True)
        report.entries["closed_form.shift_excl_mutual_mv"] = excl
        report.entries["closed_form.shift_incl_mutual_mv"] = incl
        if vertex.splitting_mv > 0.0:
            report.entries["closed_form.shift_excl_rel_dev"] = (
                excl - vertex.splitting_mv
            ) / vertex.splitting_mv
            report.entries["closed_form.shift_incl_rel_dev"] = (
                incl - vertex.splitting_mv
            ) / vertex.splitting_mv
    return report
