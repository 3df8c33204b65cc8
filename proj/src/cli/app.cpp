#include <CLI11.hpp>
#include <ostream>

#include "detkit/cli.hpp"

namespace detkit::cli {

namespace {

CLI::Validator size_validator() {
  return CLI::Validator(
      [](std::string& s) { return parse_size(s) ? std::string() : "expected WxH, got '" + s + "'"; }, "WxH");
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detection dataset toolkit: YOLO labels, augmentation, anchor codec and mAP evaluation", "detkit"};
  app.require_subcommand(1);

  ValidateOptions validate_opt;
  auto* validate = app.add_subcommand("validate", "Check every image has a well-formed label file");
  validate->add_option("root", validate_opt.root, "Dataset directory")->required();
  validate->add_option("--names", validate_opt.names, "Class names file")->required();

  SplitOptions split_opt;
  auto* split = app.add_subcommand("split", "Deterministic stratified train/val/test split of a manifest");
  split->add_option("manifest", split_opt.manifest, "Manifest of image paths")->required();
  split->add_option("--train", split_opt.spec.train, "Train fraction")->capture_default_str();
  split->add_option("--val", split_opt.spec.val, "Validation fraction")->capture_default_str();
  split->add_option("--test", split_opt.spec.test, "Test fraction")->capture_default_str();
  split->add_option("--seed", split_opt.spec.seed, "Shuffle seed")->required();
  split->add_option("--out", split_opt.out_dir, "Output directory for train/val/test.txt")->required();

  AugmentOptions aug_opt;
  auto* augment = app.add_subcommand("augment", "Write augmented copies of every image and label");
  augment->add_option("manifest", aug_opt.manifest, "Manifest of image paths")->required();
  augment->add_option("--names", aug_opt.names, "Class names file")->required();
  augment->add_option("--seed", aug_opt.params.seed, "Augmentation seed")->required();
  augment->add_option("--out", aug_opt.out_dir, "Output directory")->required();
  augment->add_option("--copies", aug_opt.copies, "Augmented copies per image")->capture_default_str();
  augment->add_option("--saturation", aug_opt.params.saturation, "Saturation jitter bound (>= 1)")
      ->capture_default_str();
  augment->add_option("--exposure", aug_opt.params.exposure, "Exposure jitter bound (>= 1)")->capture_default_str();
  augment->add_option("--hue", aug_opt.params.hue, "Hue shift bound in [0, 0.5]")->capture_default_str();
  augment->add_option("--angle", aug_opt.params.max_angle_deg, "Max rotation in degrees")->capture_default_str();
  augment->add_option("--crop-jitter", aug_opt.params.crop_jitter, "Max crop inset fraction per edge")
      ->capture_default_str();
  augment->add_option("--min-retention", aug_opt.params.min_box_retention, "Min kept fraction of a box's area")
      ->capture_default_str();
  augment->add_option("--threads", aug_opt.threads, "Worker threads (0 = hardware)")->capture_default_str();

  LetterboxOptions lb_opt;
  std::string lb_src, lb_dst = "416x416";
  std::string lb_image, lb_out;
  auto* letterbox = app.add_subcommand("letterbox", "Aspect-preserving resize with centered padding");
  letterbox->add_option("--src", lb_src, "Source size WxH")->check(size_validator());
  letterbox->add_option("--dst", lb_dst, "Network input size WxH")->check(size_validator())->capture_default_str();
  letterbox->add_option("--image", lb_image, "PNG to letterbox (labels next to it are mapped too)");
  letterbox->add_option("--out", lb_out, "Letterboxed PNG destination");

  EncodeOptions enc_opt;
  auto* encode = app.add_subcommand("encode", "Assign labels to anchor slots and write the matching logit tensor");
  encode->add_option("labels", enc_opt.labels, "YOLO label file")->required();
  encode->add_option("--cfg", enc_opt.cfg, "Network config")->required();
  encode->add_option("--out", enc_opt.out, "Tensor file to write")->required();

  DecodeOptions dec_opt;
  std::string dec_names;
  auto* decode = app.add_subcommand("decode", "Decode a raw tensor, threshold, and apply NMS");
  decode->add_option("tensor", dec_opt.tensor, "Tensor file")->required();
  decode->add_option("--cfg", dec_opt.cfg, "Network config")->required();
  decode->add_option("--names", dec_names, "Class names file");
  decode->add_option("--image", dec_opt.image, "Image name written into each detection");
  decode->add_option("--threshold", dec_opt.threshold, "Class score threshold")->capture_default_str();
  decode->add_option("--nms-iou", dec_opt.nms_iou, "NMS IoU threshold")->capture_default_str();

  NmsOptions nms_opt;
  std::string nms_names;
  auto* nms_cmd = app.add_subcommand("nms", "Per-image, per-class NMS over detection JSON lines");
  nms_cmd->add_option("detections", nms_opt.detections, "Detection JSON lines")->required();
  nms_cmd->add_option("--names", nms_names, "Class names file");
  nms_cmd->add_option("--nms-iou", nms_opt.nms_iou, "NMS IoU threshold")->capture_default_str();

  EvalOptions eval_opt;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Per-class AP and mAP of detections against ground truth");
  eval->add_option("detections", eval_opt.detections, "Detection JSON lines")->required();
  eval->add_option("--manifest", eval_opt.manifest, "Ground-truth manifest")->required();
  eval->add_option("--names", eval_opt.names, "Class names file")->required();
  eval->add_option("--iou", eval_opt.iou, "Match IoU threshold")->capture_default_str();
  eval->add_option("--out", eval_out, "Write the JSON report here; the table goes to stdout");

  ParseLogOptions log_opt;
  std::string log_out;
  auto* parse_log = app.add_subcommand("parse-log", "Extract iteration,loss,avg_loss CSV from a training log");
  parse_log->add_option("log", log_opt.log, "Training log")->required();
  parse_log->add_option("--out", log_out, "CSV destination (stdout when omitted)");

  CheckCfgOptions cfg_opt;
  auto* check_cfg = app.add_subcommand("check-cfg", "Parse and validate a network config");
  check_cfg->add_option("--cfg", cfg_opt.cfg, "Network config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (*validate) return cmd_validate(validate_opt, out, err);
  if (*split) return cmd_split(split_opt, out, err);
  if (*augment) return cmd_augment(aug_opt, out, err);
  if (*letterbox) {
    if (!lb_src.empty()) lb_opt.src = parse_size(lb_src);
    lb_opt.dst = *parse_size(lb_dst);
    if (!lb_image.empty()) lb_opt.image = lb_image;
    if (!lb_out.empty()) lb_opt.out = lb_out;
    return cmd_letterbox(lb_opt, out, err);
  }
  if (*encode) return cmd_encode(enc_opt, out, err);
  if (*decode) {
    if (!dec_names.empty()) dec_opt.names = dec_names;
    return cmd_decode(dec_opt, out, err);
  }
  if (*nms_cmd) {
    if (!nms_names.empty()) nms_opt.names = nms_names;
    return cmd_nms(nms_opt, out, err);
  }
  if (*eval) {
    if (!eval_out.empty()) eval_opt.out = eval_out;
    return cmd_eval(eval_opt, out, err);
  }
  if (*parse_log) {
    if (!log_out.empty()) log_opt.out = log_out;
    return cmd_parse_log(log_opt, out, err);
  }
  if (*check_cfg) return cmd_check_cfg(cfg_opt, out, err);
  return kUsage;
}

}  // namespace detkit::cli
