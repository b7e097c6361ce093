// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "rehab/service/harness.hpp"

using namespace rehab;
using emg::GestureLabel;

namespace {

store::TemplateDatabase calibrated(std::uint64_t seed) {
  return service::calibrate_from_simulator(sim::EmgSynthModel::default_model(seed), emg::kTemplateLabels, 3000);
}

template <class T>
long count_of(const std::vector<session::FeedbackEvent>& events) {
  return std::count_if(events.begin(), events.end(), [](const auto& e) { return e.template is<T>(); });
}

}  // namespace

TEST(EndToEnd, PerfectDefaultSession) {
  const auto plan = session::ExercisePlan::default_plan();
  const auto script = sim::make_session_script(plan);
  const auto result =
      service::run_lockstep(script, sim::EmgSynthModel::default_model(7), calibrated(1), plan);
  const auto fb = service::feedback_events(result.events);
  EXPECT_EQ(count_of<session::ev::RepCounted>(fb), 30);
  EXPECT_EQ(count_of<session::ev::SetCompleted>(fb), 6);
  EXPECT_EQ(count_of<session::ev::ExerciseCompleted>(fb), 2);
  EXPECT_EQ(count_of<session::ev::SessionCompleted>(fb), 1);
  EXPECT_EQ(count_of<session::ev::IncorrectMovement>(fb), 0);
  EXPECT_EQ(result.device.vibrations.size(), 1u);
  EXPECT_TRUE(result.device.synced);
  EXPECT_TRUE(result.log.completed);
}
