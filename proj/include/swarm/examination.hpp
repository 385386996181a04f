#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>

namespace swarm {

/// Single Browsing Model examination probabilities, indexed by
/// (result position, position of the last previous click; 0 = none yet).
class ExaminationTable {
  public:
    void set(int position, int last_clicked, double probability);

    std::optional<double> find(int position, int last_clicked) const;

    /// Throws a configuration error when the pair is not in the table.
    double at(int position, int last_clicked) const;

    bool empty() const noexcept { return p_exam_.empty(); }
    std::size_t size() const noexcept { return p_exam_.size(); }
    int max_position() const noexcept;

    /// TSV rows: position, last_clicked, p_exam. '#' lines are comments.
    static ExaminationTable parse(std::istream& in);
    static ExaminationTable load(const std::filesystem::path& path);
    void save(std::ostream& out) const;

    /// Approximation of the published browsing-model estimates, covering
    /// positions 1..max_position. Anchored at p(4, 0) = 0.82; the remaining
    /// values are a smooth fit, not measured data.
    static ExaminationTable single_browsing_approximation(int max_position = 100);

  private:
    std::map<std::pair<int, int>, double> p_exam_;
};

}  // namespace swarm
