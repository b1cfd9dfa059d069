#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "tracelab/common.hpp"

namespace tracelab {

enum class KernelRole { green, naim, schur_trace, heat_kernel };

// Dense symmetric matrix whose rows/columns are the vertices listed in index.
struct KernelMatrix {
    KernelRole role = KernelRole::green;
    VertexSet index;
    Eigen::MatrixXd values;

    Index size() const { return values.rows(); }
};

enum class MeasureRole { harmonic, elliptic, reference, killing };

std::string_view to_string(MeasureRole role);

// Nonnegative weights on the boundary vertices, in DomainGraph::boundary() order.
struct BoundaryMeasure {
    MeasureRole role = MeasureRole::reference;
    Eigen::VectorXd values;
    std::optional<Index> base_point;

    double total() const { return values.sum(); }
};

}  // namespace tracelab
