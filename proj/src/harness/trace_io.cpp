#include "isk/harness/trace_io.hpp"

#include <filesystem>
#include <fstream>

#include "isk/beliefnet/encode.hpp"
#include "isk/num/error.hpp"
#include "isk/worlds/pgm.hpp"
#include "json.hpp"

namespace isk::harness {
namespace {

nlohmann::json number_list(const Tensor& t) {
  return std::vector<double>(t.data(), t.data() + t.size());
}

Tensor reshaped(const Tensor& flat, std::vector<int> shape) {
  return Tensor::from(std::move(shape),
                      std::vector<real>(flat.data(), flat.data() + flat.size()));
}

// First `channels` planes of a channel-major [C+1,H,W] stack.
Tensor image_planes(const Tensor& stack, int channels, int h, int w) {
  return Tensor::from({channels, h, w},
                      std::vector<real>(stack.data(),
                                        stack.data() + static_cast<size_t>(channels) *
                                                           h * w));
}

void save_image(const std::string& prefix, const Tensor& chw) {
  if (chw.shape()[0] == 1)
    worlds::save_pgm(prefix + ".pgm",
                     reshaped(chw, {chw.shape()[1], chw.shape()[2]}));
  else
    worlds::save_pgm_channels(prefix, chw);
}

}  // namespace

void write_trace(const std::string& out_dir, const worlds::Environment& env,
                 const std::vector<EvalEpisode>& episodes) {
  std::filesystem::create_directories(out_dir);
  const worlds::PixelGeometry* geom = env.pixel_geometry();
  for (size_t e = 0; e < episodes.size(); ++e) {
    const EvalEpisode& ep = episodes[e];
    ISK_CHECK(static_cast<int>(ep.steps.size()) == ep.length,
              "episode " << e << " carries " << ep.steps.size()
                         << " step records for length " << ep.length
                         << " (was it evaluated with step recording?)");
    const std::string base = out_dir + "/episode_" + std::to_string(e);
    std::ofstream os(base + ".jsonl", std::ios::trunc);
    ISK_CHECK(os.good(), "cannot write trace " << base << ".jsonl");

    TrialHistory replay(&env.questions());
    for (size_t s = 0; s < ep.steps.size(); ++s) {
      const EvalStepRecord& rec = ep.steps[s];
      nlohmann::json line{{"episode", e},
                          {"step", s},
                          {"label", ep.label},
                          {"question", rec.question},
                          {"answer", number_list(rec.answer)},
                          {"value", rec.value},
                          {"ext", rec.ext},
                          {"intr", rec.intr},
                          {"level", rec.level},
                          {"pi", number_list(rec.pi)}};
      if (!rec.fy.empty()) line["fy"] = number_list(rec.fy);
      os << line.dump() << "\n";

      if (geom != nullptr) {
        const std::string step_base = base + "_step_" + std::to_string(s);
        Tensor enc = beliefnet::encode_image(replay, *geom);
        save_image(step_base + "_canvas",
                   image_planes(enc, geom->channels, geom->height, geom->width));
        save_image(step_base + "_fx",
                   reshaped(rec.fx, {geom->channels, geom->height, geom->width}));
        worlds::save_pgm(step_base + "_policy.pgm",
                         reshaped(rec.pi, {geom->grid_h(), geom->grid_w()}));
      }
      replay.add(rec.question, rec.answer);
    }
  }
}

}  // namespace isk::harness
