#include "motionid/classifier.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "motionid/gbdt.hpp"
#include "motionid/logistic.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

std::shared_ptr<const Classifier> load_classifier(std::istream& in) {
  const auto start = in.tellg();
  std::string header;
  if (!std::getline(in, header)) throw ModelError("empty model file");
  in.clear();
  in.seekg(start);
  const auto format = text::trim(header);
  if (format == "GBDT1") return std::make_shared<const GbdtModel>(GbdtModel::load(in));
  if (format == "LOGIT1") return std::make_shared<const LogisticModel>(LogisticModel::load(in));
  throw ModelError("unknown model format '" + std::string(format) + "'");
}

std::vector<ClassLabel> distinct_classes(std::span<const ClassLabel> labels) {
  if (labels.empty()) throw ModelError("no labels");
  std::vector<ClassLabel> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

}  // namespace motionid
