#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vbs {

// One threshold tuple handed to the real-time scheduler; the bandit arm.
struct Policy {
  double tx_power_dl = 0.0;  // watts
  int mcs_dl = 0;
  double prb_ratio_dl = 0.0;  // fraction of the PRB grid, [0, 1]
  int mcs_ul = 0;
  double prb_ratio_ul = 0.0;

  bool operator==(const Policy&) const = default;
};

// The discrete policy grid. Immutable after construction; index_of/policy_at
// form a bijection under row-major order over
// (tx_power_dl, mcs_dl, prb_ratio_dl, mcs_ul, prb_ratio_ul),
// with the last component varying fastest.
class PolicySpace {
 public:
  PolicySpace(std::vector<double> tx_power_dl, std::vector<int> mcs_dl,
              std::vector<double> prb_dl, std::vector<int> mcs_ul,
              std::vector<double> prb_ul);

  std::size_t size() const { return size_; }

  Policy policy_at(std::size_t index) const;
  std::size_t index_of(const Policy& p) const;

  const std::vector<double>& set_p_dl() const { return p_dl_; }
  const std::vector<int>& set_m_dl() const { return m_dl_; }
  const std::vector<double>& set_b_dl() const { return b_dl_; }
  const std::vector<int>& set_m_ul() const { return m_ul_; }
  const std::vector<double>& set_b_ul() const { return b_ul_; }

  // Component positions of an arm, used for grid-ordered outputs.
  struct ComboIndex {
    std::size_t dl;  // joint (mcs_dl, prb_dl) position
    std::size_t ul;  // joint (mcs_ul, prb_ul) position
  };
  ComboIndex combo_of(std::size_t index) const;
  std::size_t dl_combo_count() const { return m_dl_.size() * b_dl_.size(); }
  std::size_t ul_combo_count() const { return m_ul_.size() * b_ul_.size(); }

 private:
  std::vector<double> p_dl_;
  std::vector<int> m_dl_;
  std::vector<double> b_dl_;
  std::vector<int> m_ul_;
  std::vector<double> b_ul_;
  std::size_t size_ = 0;
};

// The 1080-policy grid of the bundled measurement campaign.
PolicySpace build_paper_space();

// Reduced 16-policy grid: min and max of each MCS/PRB set, single power level.
PolicySpace build_paper16_space();

}  // namespace vbs
