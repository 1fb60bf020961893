#ifndef EQFREE_GRID_HPP
#define EQFREE_GRID_HPP

#include <cmath>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "eqfree/core.hpp"

namespace eqfree {

enum class CellKind : std::uint8_t { Fluid = 0, Obstacle = 1 };

enum class Quantity : std::uint8_t { Density = 0, Potential = 1 };

// Axis-aligned square obstacle, described in physical units.
struct ObstacleSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double side = 0.0;  // side == 0 means no obstacle

    bool empty() const { return side <= 0.0; }
};

// Immutable corridor geometry. Fields reference a shared_ptr<const Grid>
// so snapshots stay cheap to copy and safe to share across workers.
class Grid {
public:
    Grid(int nx, int ny, double length_x, double length_y, ObstacleSpec obstacle)
        : nx_(nx), ny_(ny), length_x_(length_x), length_y_(length_y),
          obstacle_(obstacle) {
        if (nx < 4 || ny < 4) throw GeometryError("grid: need nx >= 4 and ny >= 4");
        if (length_x <= 0.0 || length_y <= 0.0)
            throw GeometryError("grid: domain lengths must be positive");
        dx_ = length_x_ / nx_;
        dy_ = length_y_ / ny_;
        cell_kind_.assign(static_cast<std::size_t>(nx_) * ny_, CellKind::Fluid);
        if (!obstacle_.empty()) {
            validate_obstacle();
            tag_obstacle_cells();
        }
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double length_x() const { return length_x_; }
    double length_y() const { return length_y_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double cell_area() const { return dx_ * dy_; }
    const ObstacleSpec& obstacle() const { return obstacle_; }
    std::size_t cell_count() const { return cell_kind_.size(); }

    // row-major over (i, j): index = j*nx + i
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * nx_ + i;
    }
    double center_x(int i) const { return (i + 0.5) * dx_; }
    double center_y(int j) const { return (j + 0.5) * dy_; }

    CellKind kind(int i, int j) const { return cell_kind_[index(i, j)]; }
    bool is_fluid(int i, int j) const { return kind(i, j) == CellKind::Fluid; }
    bool is_obstacle(int i, int j) const { return kind(i, j) == CellKind::Obstacle; }
    const std::vector<CellKind>& cell_kinds() const { return cell_kind_; }

    std::size_t obstacle_cell_count() const {
        std::size_t n = 0;
        for (auto k : cell_kind_) n += (k == CellKind::Obstacle);
        return n;
    }

    bool same_geometry(const Grid& other) const {
        return nx_ == other.nx_ && ny_ == other.ny_ &&
               length_x_ == other.length_x_ && length_y_ == other.length_y_ &&
               cell_kind_ == other.cell_kind_;
    }

private:
    void validate_obstacle() const {
        const double half = obstacle_.side / 2.0;
        const double x_lo = obstacle_.center_x - half;
        const double x_hi = obstacle_.center_x + half;
        const double y_lo = obstacle_.center_y - half;
        const double y_hi = obstacle_.center_y + half;
        // strictly interior: at least one cell of clearance on every side
        if (x_lo < dx_ || x_hi > length_x_ - dx_)
            throw GeometryError("obstacle touches or crosses the x-periodic boundary");
        if (y_lo < dy_ || y_hi > length_y_ - dy_)
            throw GeometryError("obstacle touches or crosses a y-wall");
    }

    void tag_obstacle_cells() {
        // Membership by cell-center containment, half-open on the max edges,
        // so ties resolve the same way on every grid resolution.
        const double half = obstacle_.side / 2.0;
        const double x_lo = obstacle_.center_x - half;
        const double x_hi = obstacle_.center_x + half;
        const double y_lo = obstacle_.center_y - half;
        const double y_hi = obstacle_.center_y + half;
        for (int j = 0; j < ny_; ++j) {
            const double cy = center_y(j);
            if (cy < y_lo || cy >= y_hi) continue;
            for (int i = 0; i < nx_; ++i) {
                const double cx = center_x(i);
                if (cx >= x_lo && cx < x_hi) cell_kind_[index(i, j)] = CellKind::Obstacle;
            }
        }
    }

    int nx_, ny_;
    double length_x_, length_y_;
    double dx_, dy_;
    ObstacleSpec obstacle_;
    std::vector<CellKind> cell_kind_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(int nx, int ny, double length_x, double length_y,
                          ObstacleSpec obstacle = {}) {
    return std::make_shared<const Grid>(nx, ny, length_x, length_y, obstacle);
}

// One cell-averaged scalar field on a Grid at one time instant.
class Field {
public:
    Field(GridPtr grid, Quantity quantity, double time = 0.0)
        : grid_(std::move(grid)), quantity_(quantity), time_(time),
          values_(grid_->cell_count(), 0.0) {}

    Field(GridPtr grid, Quantity quantity, std::vector<double> values, double time = 0.0)
        : grid_(std::move(grid)), quantity_(quantity), time_(time),
          values_(std::move(values)) {
        if (values_.size() != grid_->cell_count())
            throw SizeError("field: value count does not match grid");
    }

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    Quantity quantity() const { return quantity_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    double operator()(int i, int j) const { return values_[grid_->index(i, j)]; }
    double& operator()(int i, int j) { return values_[grid_->index(i, j)]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    GridPtr grid_;
    Quantity quantity_;
    double time_;
    std::vector<double> values_;
};

// Integral of a density field over fluid cells, in people.
inline double total_mass(const Field& field) {
    if (field.quantity() != Quantity::Density)
        throw DomainError("total_mass: field is not a density");
    const Grid& g = field.grid();
    KahanAccumulator acc;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.is_fluid(i, j)) acc.add(field(i, j));
    return acc.value() * g.cell_area();
}

}  // namespace eqfree

#endif  // EQFREE_GRID_HPP
