#include "ktt/dimtree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ktt {

namespace {

// One node of the sketch evaluation plan. `apply` holds the modes contracted
// when building this node from its parent (empty only at the root). A leaf
// withholds exactly one mode and yields that mode's sketch.
struct PlanNode {
  std::vector<int> apply;
  std::vector<int> children;
  int leaf_mode = -1;
};

void split_tree(std::vector<PlanNode>& plan, int parent, const std::vector<int>& withheld) {
  if (withheld.size() == 1) {
    plan[static_cast<std::size_t>(parent)].leaf_mode = withheld.front();
    return;
  }
  const std::size_t half = (withheld.size() + 1) / 2;  // extra mode goes left
  const std::vector<int> left(withheld.begin(), withheld.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<int> right(withheld.begin() + static_cast<std::ptrdiff_t>(half), withheld.end());

  // each child applies its sibling's modes and withholds its own
  PlanNode l;
  l.apply = right;
  plan.push_back(std::move(l));
  const int li = static_cast<int>(plan.size()) - 1;
  plan[static_cast<std::size_t>(parent)].children.push_back(li);
  split_tree(plan, li, left);

  PlanNode r;
  r.apply = left;
  plan.push_back(std::move(r));
  const int ri = static_cast<int>(plan.size()) - 1;
  plan[static_cast<std::size_t>(parent)].children.push_back(ri);
  split_tree(plan, ri, right);
}

std::vector<PlanNode> build_plan(int d, bool with_tree) {
  std::vector<PlanNode> plan(1);  // root: the input, nothing applied
  if (with_tree) {
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    split_tree(plan, 0, all);
    return plan;
  }
  for (int j = 0; j < d; ++j) {
    PlanNode node;
    for (int k = 0; k < d; ++k)
      if (k != j) node.apply.push_back(k);
    node.leaf_mode = j;
    plan.push_back(std::move(node));
    plan[0].children.push_back(static_cast<int>(plan.size()) - 1);
  }
  return plan;
}

void walk_real(const std::vector<PlanNode>& plan, int node, const DenseTensor& t,
               const std::vector<Matrix>& phis, SketchSet& out, FlopCounter& flops) {
  const PlanNode& n = plan[static_cast<std::size_t>(node)];
  DenseTensor own;
  const DenseTensor* cur = &t;
  if (!n.apply.empty()) {
    std::vector<ModeApplication> apps;
    for (int k : n.apply) apps.push_back({k, &phis[static_cast<std::size_t>(k)], true});
    own = multi_ttm(t, apps, ModeOrder::DescendingSize, &flops);
    cur = &own;
    out.node_evaluations += 1;
    out.ttm_applications += static_cast<std::int64_t>(n.apply.size());
  }
  if (n.leaf_mode >= 0) {
    out.sketches[static_cast<std::size_t>(n.leaf_mode)] = *cur;
    return;
  }
  for (int child : n.children) walk_real(plan, child, *cur, phis, out, flops);
}

// shape-only replay of walk_real, duplicating multi_ttm's contraction order
std::int64_t walk_shapes(const std::vector<PlanNode>& plan, int node, std::vector<index_t> dims,
                         const std::vector<index_t>& widths) {
  const PlanNode& n = plan[static_cast<std::size_t>(node)];
  std::int64_t flops = 0;
  std::vector<int> order = n.apply;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dims[static_cast<std::size_t>(a)] != dims[static_cast<std::size_t>(b)])
      return dims[static_cast<std::size_t>(a)] > dims[static_cast<std::size_t>(b)];
    return a < b;
  });
  for (int k : order) {
    index_t other = 1;
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (static_cast<int>(i) != k) other *= dims[i];
    flops += 2 * other * widths[static_cast<std::size_t>(k)] * dims[static_cast<std::size_t>(k)];
    dims[static_cast<std::size_t>(k)] = widths[static_cast<std::size_t>(k)];
  }
  for (int child : n.children) flops += walk_shapes(plan, child, dims, widths);
  return flops;
}

}  // namespace

SketchSet all_mode_sketches(const DenseTensor& x, const std::vector<Matrix>& phis, bool use_tree,
                            FlopCounter* counter) {
  const int d = x.order();
  if (d < 2) throw std::invalid_argument("sketch pass needs order >= 2");
  if (static_cast<int>(phis.size()) != d)
    throw std::invalid_argument("need one projection per mode");
  for (int k = 0; k < d; ++k) {
    const Matrix& phi = phis[static_cast<std::size_t>(k)];
    if (phi.rows() != x.dim(k))
      throw std::invalid_argument("projection " + std::to_string(k) + " has " +
                                  std::to_string(phi.rows()) + " rows, mode size is " +
                                  std::to_string(x.dim(k)));
    if (phi.cols() < 1) throw std::invalid_argument("projection with no columns");
  }

  SketchSet out;
  out.sketches.resize(static_cast<std::size_t>(d));
  FlopCounter local;
  const std::vector<PlanNode> plan = build_plan(d, use_tree);
  walk_real(plan, 0, x, phis, out, local);
  out.flops = local.total();
  if (counter) counter->add(out.flops);
  return out;
}

std::int64_t predicted_sketch_flops(index_t n, index_t r, int d, bool with_tree) {
  if (d < 2) throw std::invalid_argument("sketch pass needs order >= 2");
  if (n < 1 || r < 1) throw std::invalid_argument("sizes must be positive");
  const std::vector<PlanNode> plan = build_plan(d, with_tree);
  const std::vector<index_t> dims(static_cast<std::size_t>(d), n);
  const std::vector<index_t> widths(static_cast<std::size_t>(d), r);
  return walk_shapes(plan, 0, dims, widths);
}

std::int64_t predicted_node_evaluations(int d, bool with_tree) {
  if (d < 2) throw std::invalid_argument("sketch pass needs order >= 2");
  return with_tree ? 2 * (static_cast<std::int64_t>(d) - 1) : d;
}

std::int64_t predicted_ttm_applications(int d, bool with_tree) {
  if (d < 2) throw std::invalid_argument("sketch pass needs order >= 2");
  if (!with_tree) return static_cast<std::int64_t>(d) * (d - 1);
  // f(m) = m + f(ceil(m/2)) + f(floor(m/2)), f(1) = 0
  std::vector<std::int64_t> f(static_cast<std::size_t>(d) + 1, 0);
  for (int m = 2; m <= d; ++m)
    f[static_cast<std::size_t>(m)] =
        m + f[static_cast<std::size_t>((m + 1) / 2)] + f[static_cast<std::size_t>(m / 2)];
  return f[static_cast<std::size_t>(d)];
}

}  // namespace ktt
