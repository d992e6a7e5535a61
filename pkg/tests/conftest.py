import hypothesis.strategies as st
from hypothesis import HealthCheck, settings

from hurwitz_kernel.algebra import AlgebraElem, get_ctx
from hurwitz_kernel.exact import Q
from hurwitz_kernel.hurwitz import TruncatedSeries

settings.register_profile(
    "kernel", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("kernel")

CTX_NAMES = ("rat", "mat2", "poly3")
LAMBDAS = (Q(0), Q(1), Q(2), Q(-1), Q(1) / 2)


@st.composite
def scalars(draw, spread=6):
    num = draw(st.integers(-spread, spread))
    den = draw(st.sampled_from((1, 1, 2, 3, 5)))
    return Q(num) / den


@st.composite
def elems(draw, ctx):
    return AlgebraElem(ctx, [draw(scalars()) for _ in range(ctx.dim)])


@st.composite
def series(draw, ctx, level):
    return TruncatedSeries(ctx, [draw(elems(ctx)) for _ in range(level)])


@st.composite
def series_pair(draw, ctx_names=CTX_NAMES, max_level=6, count=2):
    ctx = get_ctx(draw(st.sampled_from(ctx_names)))
    level = draw(st.integers(1, max_level))
    return tuple(draw(series(ctx, level)) for _ in range(count))


# acceptance summary, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
