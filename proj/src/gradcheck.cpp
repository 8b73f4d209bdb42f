#include "mmlat/gradcheck.hpp"

#include <cmath>
#include <string>

namespace mmlat {

namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor>& params) {
    Graph graph;
    std::vector<Tensor> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(graph.var(p));
    Tensor out = fn(graph, vars);
    double v = out.item();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite evaluation");
    return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, const std::vector<Tensor>& params, double h,
                           double tol) {
    GradCheckReport report;
    report.h = h;
    report.tol = tol;

    Graph graph;
    std::vector<Tensor> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(graph.var(p));
    Tensor out = fn(graph, vars);
    if (!std::isfinite(out.item())) throw NumericError("grad_check: non-finite evaluation");
    std::vector<Tensor> grads = graph.gradients(out, vars);

    std::vector<Tensor> work = params;
    report.max_rel_error.assign(params.size(), 0.0);
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p].size(); ++i) {
            double saved = work[p][i];
            work[p][i] = saved + h;
            double fp = evaluate(fn, work);
            work[p][i] = saved - h;
            double fm = evaluate(fn, work);
            work[p][i] = saved;

            double numeric = (fp - fm) / (2.0 * h);
            double analytic = grads[p][i];
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            double rel = std::abs(numeric - analytic) / denom;
            report.max_rel_error[p] = std::max(report.max_rel_error[p], rel);
        }
        report.worst = std::max(report.worst, report.max_rel_error[p]);
    }
    report.pass = report.worst <= tol;
    return report;
}

}  // namespace mmlat
