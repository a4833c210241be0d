from lvpir.audit import audit_exact
from lvpir.planner import SchemePlan, plan_grouping, solve_exhaustive
from lvpir.plotting import plot_costs, plot_posteriors


def test_figures_for_failing_audit(h1, tmp_path):
    report = audit_exact(h1, SchemePlan.partition(3, [[1], [2], [3]]))
    plot_posteriors(report, tmp_path / "post.png")
    plot_costs({"exhaustive": solve_exhaustive(h1)[1], "grouping": plan_grouping(h1)[1]},
               tmp_path / "cost.png")
    for name in ("post.png", "cost.png"):
        assert (tmp_path / name).read_bytes()[:4] == b"\x89PNG"
