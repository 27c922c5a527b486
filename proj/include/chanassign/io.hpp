#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "chanassign/auction.hpp"
#include "chanassign/bounds.hpp"
#include "chanassign/csma.hpp"
#include "chanassign/matrix.hpp"

namespace chanassign {

// Channel indices are 0-based in every file format; unassigned users are
// JSON null.

inline nlohmann::json assignment_to_json(const Assignment& a) {
  nlohmann::json arr = nlohmann::json::array();
  for (int k : a.channel_of) {
    if (k == kUnassigned) {
      arr.push_back(nullptr);
    } else {
      arr.push_back(k);
    }
  }
  return arr;
}

inline nlohmann::json solver_result_json(const std::string& mode,
                                         const Assignment& a,
                                         const AuctionTrace& trace,
                                         double eps) {
  nlohmann::json j;
  j["mode"] = mode;
  j["assignment"] = assignment_to_json(a);
  j["value"] = a.value;
  j["iterations"] = {{"rounds", trace.rounds}, {"total_bids", trace.total_bids}};
  j["per_user_unassigned_counts"] = trace.unassigned_iters;
  j["eps"] = eps;
  if (trace.quantization_warning) j["quantization_warning"] = true;
  return j;
}

inline void trace_to_csv(const AuctionTrace& trace, std::ostream& out) {
  out << "iteration,user,channel,bid\n";
  out.precision(17);
  for (const BidEvent& e : trace.bid_events) {
    out << e.iteration << ',' << e.user << ',' << e.channel << ',' << e.bid
        << '\n';
  }
}

inline void slots_to_csv(const std::vector<SlotOutcome>& slots,
                         std::ostream& out) {
  out << "slot,channel,winner,winner_bid,backoff_ms\n";
  out.precision(17);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (std::size_t k = 0; k < slots[s].channels.size(); ++k) {
      const ChannelOutcome& c = slots[s].channels[k];
      out << (s + 1) << ',' << k << ',';
      if (c.winner < 0) {
        out << "idle,,";
      } else {
        out << c.winner << ',' << c.winner_bid << ',' << c.backoff_ms;
      }
      out << '\n';
    }
  }
}

inline nlohmann::json bound_report_json(const BoundReport& b) {
  return nlohmann::json{{"n_users", b.n_users},
                        {"n_channels", b.n_channels},
                        {"lambda", b.lambda},
                        {"snr_db", b.snr_db},
                        {"L", b.lower},
                        {"U", b.upper},
                        {"relative_gap", b.relative_gap},
                        {"low_snr_regime", b.low_snr_regime},
                        {"high_snr_regime", b.high_snr_regime}};
}

inline void bound_report_csv_header(std::ostream& out) {
  out << "n,k,lambda,snr_db,L,U,rel_gap\n";
}

inline void bound_report_csv_row(const BoundReport& b, std::ostream& out) {
  out.precision(17);
  out << b.n_users << ',' << b.n_channels << ',' << b.lambda << ',' << b.snr_db
      << ',' << b.lower << ',' << b.upper << ',' << b.relative_gap << '\n';
}

}  // namespace chanassign
