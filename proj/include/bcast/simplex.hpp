#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "bcast/error.hpp"
#include "bcast/rational.hpp"

namespace bcast {

namespace detail {

inline int field_sign(const Rational& x) { return sgn(x); }
inline int field_sign(double x) {
  constexpr double eps = 1e-11;
  return x > eps ? 1 : (x < -eps ? -1 : 0);
}

}  // namespace detail

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded };

/// maximize c'x subject to rows (a'x <= / = / >= b) and x >= 0.
template <class Field>
class LinearProgram {
 public:
  struct Row {
    std::vector<std::pair<std::size_t, Field>> terms;
    RowSense sense;
    Field rhs;
  };

  explicit LinearProgram(std::size_t variables) : objective_(variables, Field(0)) {}

  std::size_t variable_count() const noexcept { return objective_.size(); }
  std::size_t row_count() const noexcept { return rows_.size(); }
  const std::vector<Field>& objective() const noexcept { return objective_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  void set_objective(std::size_t var, Field coefficient) {
    objective_.at(var) = std::move(coefficient);
  }

  std::size_t add_row(std::vector<std::pair<std::size_t, Field>> terms, RowSense sense, Field rhs) {
    for (const auto& [var, coef] : terms)
      if (var >= objective_.size())
        throw Error(ErrorCode::InvalidArgument, "LP row refers to an unknown variable");
    rows_.push_back(Row{std::move(terms), sense, std::move(rhs)});
    return rows_.size() - 1;
  }

 private:
  std::vector<Field> objective_;
  std::vector<Row> rows_;
};

template <class Field>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Field objective = Field(0);
  std::vector<Field> values;  // structural variables only
  std::size_t pivots = 0;
};

namespace detail {

// Dense two-phase tableau. Dantzig pricing, falling back to Bland's rule
// during runs of degenerate pivots so the method cannot cycle.
template <class Field>
class Tableau {
 public:
  explicit Tableau(const LinearProgram<Field>& lp) : structural_(lp.variable_count()) {
    const auto& rows = lp.rows();
    const std::size_t m = rows.size();
    std::size_t slacks = 0;
    std::size_t artificials = 0;
    for (const auto& row : rows) {
      const bool flip = field_sign(row.rhs) < 0;
      RowSense sense = row.sense;
      if (flip && sense != RowSense::Equal)
        sense = sense == RowSense::LessEqual ? RowSense::GreaterEqual : RowSense::LessEqual;
      if (sense != RowSense::Equal) ++slacks;
      if (sense != RowSense::LessEqual) ++artificials;
    }
    first_artificial_ = structural_ + slacks;
    columns_ = first_artificial_ + artificials;
    a_.assign(m + 1, std::vector<Field>(columns_, Field(0)));
    b_.assign(m + 1, Field(0));
    basis_.assign(m, 0);

    std::size_t next_slack = structural_;
    std::size_t next_art = first_artificial_;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = rows[i];
      const bool flip = field_sign(row.rhs) < 0;
      RowSense sense = row.sense;
      if (flip && sense != RowSense::Equal)
        sense = sense == RowSense::LessEqual ? RowSense::GreaterEqual : RowSense::LessEqual;
      for (const auto& [var, coef] : row.terms) a_[i][var] += flip ? Field(-coef) : coef;
      b_[i] = flip ? Field(-row.rhs) : row.rhs;
      if (sense == RowSense::LessEqual) {
        a_[i][next_slack] = 1;
        basis_[i] = next_slack++;
      } else {
        if (sense == RowSense::GreaterEqual) a_[i][next_slack++] = -1;
        a_[i][next_art] = 1;
        basis_[i] = next_art++;
      }
    }
  }

  LpResult<Field> solve(const std::vector<Field>& objective) {
    LpResult<Field> result;
    if (first_artificial_ < columns_) {
      std::vector<Field> phase1(columns_, Field(0));
      for (std::size_t j = first_artificial_; j < columns_; ++j) phase1[j] = -1;
      load_objective(phase1);
      run(columns_, result.pivots);
      if (field_sign(b_.back()) < 0) {
        result.status = LpStatus::Infeasible;
        return result;
      }
      drive_out_artificials(result.pivots);
    }
    std::vector<Field> phase2(columns_, Field(0));
    for (std::size_t j = 0; j < structural_; ++j) phase2[j] = objective[j];
    load_objective(phase2);
    if (!run(first_artificial_, result.pivots)) {
      result.status = LpStatus::Unbounded;
      return result;
    }
    result.status = LpStatus::Optimal;
    result.objective = b_.back();
    result.values.assign(structural_, Field(0));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < structural_) result.values[basis_[i]] = b_[i];
    return result;
  }

 private:
  // Objective row holds z_j - c_j; entering candidates have negative entries.
  void load_objective(const std::vector<Field>& cost) {
    auto& z = a_.back();
    for (std::size_t j = 0; j < columns_; ++j) z[j] = -cost[j];
    b_.back() = 0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Field& cb = cost[basis_[i]];
      if (field_sign(cb) == 0) continue;
      for (std::size_t j = 0; j < columns_; ++j)
        if (field_sign(a_[i][j]) != 0) z[j] += cb * a_[i][j];
      b_.back() += cb * b_[i];
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& pivot_row = a_[r];
    const Field inv = Field(1) / pivot_row[c];
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < columns_; ++j)
      if (field_sign(pivot_row[j]) != 0) {
        pivot_row[j] *= inv;
        nonzero.push_back(j);
      }
    pivot_row[c] = 1;
    b_[r] *= inv;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (i == r) continue;
      auto& row = a_[i];
      if (field_sign(row[c]) == 0) continue;
      const Field factor = row[c];
      for (std::size_t j : nonzero) row[j] -= factor * pivot_row[j];
      row[c] = 0;
      b_[i] -= factor * b_[r];
    }
    basis_[r] = c;
  }

  // Returns false when unbounded. Columns >= `limit` never enter.
  bool run(std::size_t limit, std::size_t& pivots) {
    const auto& z = a_.back();
    std::size_t degenerate_streak = 0;
    while (true) {
      const bool bland = degenerate_streak > 16;
      std::size_t enter = columns_;
      for (std::size_t j = 0; j < limit; ++j) {
        if (field_sign(z[j]) >= 0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (enter == columns_ || z[j] < z[enter]) enter = j;
      }
      if (enter == columns_) return true;

      std::size_t leave = basis_.size();
      Field best_ratio(0);
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (field_sign(a_[i][enter]) <= 0) continue;
        Field ratio = b_[i] / a_[i][enter];
        if (leave == basis_.size() || ratio < best_ratio ||
            (field_sign(ratio - best_ratio) == 0 && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == basis_.size()) return false;
      degenerate_streak = field_sign(best_ratio) == 0 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void drive_out_artificials(std::size_t& pivots) {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i] < first_artificial_) continue;
      for (std::size_t j = 0; j < first_artificial_; ++j)
        if (field_sign(a_[i][j]) != 0) {
          pivot(i, j);
          ++pivots;
          break;
        }
      // A row with no structural entry is redundant; its artificial stays
      // basic at zero and never re-enters.
    }
  }

  std::size_t structural_;
  std::size_t first_artificial_ = 0;
  std::size_t columns_ = 0;
  std::vector<std::vector<Field>> a_;  // last row is the objective
  std::vector<Field> b_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

template <class Field>
LpResult<Field> solve(const LinearProgram<Field>& lp) {
  detail::Tableau<Field> tableau(lp);
  return tableau.solve(lp.objective());
}

}  // namespace bcast
