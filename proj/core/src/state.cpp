#include "ncr/state.hpp"

#include <algorithm>

namespace ncr {

JointState JointState::rest(const RobotParams& params) {
  JointState s;
  s.tips.assign(params.joint_count, BeamTip::rest(params.beam_length));
  return s;
}

const FlexureSplit* JointState::split_for(std::size_t joint) const {
  const auto it = std::find_if(splits.begin(), splits.end(),
                               [joint](const FlexureSplit& s) { return s.joint == joint; });
  return it == splits.end() ? nullptr : &*it;
}

FrictionSigns FrictionSigns::zero(std::size_t joints) {
  FrictionSigns f;
  f.values.assign(joints, CableArray{});
  return f;
}

}  // namespace ncr
