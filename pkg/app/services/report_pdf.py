from io import BytesIO

from PyPDF2 import PdfReader, PdfWriter
from reportlab.lib.pagesizes import A4
from reportlab.pdfgen import canvas

from app.schemas import PipelineReportModel

MARGIN = 40
BOTTOM = 80
LINE = 14


class _Cursor:
    def __init__(self, c: canvas.Canvas):
        self.c = c
        self.width, self.height = A4
        self.y = self.height - 50

    def _room(self, needed: float):
        if self.y - needed < BOTTOM:
            self.c.showPage()
            self.y = self.height - 50

    def title(self, text: str):
        self._room(30)
        self.c.setFont("Helvetica-Bold", 16)
        self.c.drawString(MARGIN, self.y, text)
        self.y -= 30

    def section(self, text: str):
        self._room(40)
        self.y -= 6
        self.c.setFont("Helvetica-Bold", 12)
        self.c.drawString(MARGIN, self.y, text)
        self.y -= 18

    def line(self, text: str, indent: int = 0):
        self._room(LINE)
        self.c.setFont("Helvetica", 10)
        self.c.drawString(MARGIN + indent, self.y, text[:110])
        self.y -= LINE


def _inequality_text(model) -> str:
    parts = []
    for t in model.terms:
        weight = "" if t.q == "1/1" else f"{t.q}*"
        parts.append(f"{weight}p({''.join(map(str, t.a))}|{''.join(map(str, t.x))})")
    return " + ".join(parts) + f" <= {model.classical_bound or '?'}"


def render_pipeline_pdf(report: PipelineReportModel) -> bytes:
    """A4 summary, one section per sub-report; skipped parts listed with their reason."""
    buffer = BytesIO()
    c = canvas.Canvas(buffer, pagesize=A4)
    cur = _Cursor(c)

    cur.title("UPB / Bell inequality pipeline")
    cur.line(f"Input: {report.input}")
    cur.line(f"Seed: {report.seed}   restarts: {report.restarts}   version: {report.version}")

    if report.orthogonality is not None:
        cur.section("Orthogonality")
        cur.line(f"orthogonal: {report.orthogonality.ok} (worst overlap {report.orthogonality.worst_overlap:.3e})")

    if report.property_p is not None:
        cur.section("Property (P)")
        cur.line(f"holds: {report.property_p.ok}")
        if report.property_p.violation is not None:
            v = report.property_p.violation
            cur.line(f"party {v.party}: rays {v.pair} overlap {v.overlap:.3e}", indent=10)

    if report.inequality is not None:
        cur.section("Bell inequality")
        cur.line(_inequality_text(report.inequality))
        if report.canonical is not None:
            cur.line("canonical: " + _inequality_text(report.canonical))

    if report.bounds is not None:
        b = report.bounds
        cur.section("Bounds")
        cur.line(f"beta_C = {b.beta_c}")
        if b.beta_q_spectral is not None:
            cur.line(f"beta_Q (spectral, own projectors) = {b.beta_q_spectral:.12f}")
        if b.beta_q_seesaw is not None:
            cur.line(f"beta_Q (see-saw lower bound) = {b.beta_q_seesaw:.12f}")
        if b.beta_n is not None:
            cur.line(f"beta_N = {b.beta_n} ({b.ns_method}); nontrivial: {b.nontrivial}")

    if report.witness is not None:
        w = report.witness
        cur.section("Witness and bound entangled state")
        cur.line(f"epsilon = {w.epsilon:.12f} ({w.epsilon_status})")
        cur.line(f"Tr(BW) = {w.trace_BW:.12f}   formula = {w.formula_value:.12f}")
        cur.line(f"Tr(W rho) = {w.trace_W_rho:.3e}")
        for entry in w.ppt:
            cur.line(f"PPT across {entry.side}: {entry.ppt} (min eigenvalue {entry.min_eigenvalue:.3e})", indent=10)

    if report.extendibility is not None:
        cur.section("Unextendibility")
        cur.line(f"status: {report.extendibility.status} ({report.extendibility.method})")

    if report.tightness is not None:
        t = report.tightness
        cur.section("Tightness")
        cur.line(f"face dimension {t.face_dim} of {t.polytope_dim}; facet: {t.is_facet}")
        cur.line(f"saturating deterministic points: {t.saturating_count}")

    if report.skipped or report.warnings:
        cur.section("Skipped and warnings")
        for name, reason in report.skipped.items():
            cur.line(f"{name}: {reason}")
        for message in report.warnings:
            cur.line(f"warning: {message}")

    c.showPage()
    c.save()

    writer = PdfWriter()
    for page in PdfReader(BytesIO(buffer.getvalue())).pages:
        writer.add_page(page)
    writer.add_metadata({"/Title": "UPB / Bell inequality pipeline", "/Subject": f"seed {report.seed}"})
    out = BytesIO()
    writer.write(out)
    return out.getvalue()
