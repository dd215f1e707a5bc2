import { describe, expect, it } from "vitest";

import { isDicom, stageFiles } from "../src/upload.js";

function dicomBytes(extra = 64): Uint8Array {
  const bytes = new Uint8Array(128 + 4 + extra);
  bytes.set([0x44, 0x49, 0x43, 0x4d], 128); // "DICM" after the preamble
  return bytes;
}

describe("DICOM detection", () => {
  it("accepts a well-formed preamble + magic", () => {
    expect(isDicom(dicomBytes())).toBe(true);
  });

  it("rejects text files, truncated files, and misplaced magic", () => {
    expect(isDicom(new TextEncoder().encode("hello,world\n"))).toBe(false);
    expect(isDicom(dicomBytes().slice(0, 100))).toBe(false);
    const shifted = new Uint8Array(200);
    shifted.set([0x44, 0x49, 0x43, 0x4d], 0);
    expect(isDicom(shifted)).toBe(false);
  });
});

describe("staging", () => {
  it("stages valid slices and reports the count", () => {
    const files = [1, 2, 3, 4].map((i) => ({ name: `slice${i}.dcm`, bytes: dicomBytes() }));
    const result = stageFiles(files);
    expect(result.staged.length).toBe(4);
    expect(result.flagged.length).toBe(0);
    expect(result.summary).toBe("4 slices staged");
    expect(result.canSubmit).toBe(true);
  });

  it("disables submission with no files", () => {
    const result = stageFiles([]);
    expect(result.summary).toBe("no files selected");
    expect(result.canSubmit).toBe(false);
  });

  it("flags non-DICOM files inline and excludes them", () => {
    const result = stageFiles([
      { name: "a.dcm", bytes: dicomBytes() },
      { name: "b.dcm", bytes: dicomBytes() },
      { name: "c.dcm", bytes: dicomBytes() },
      { name: "notes.txt", bytes: new TextEncoder().encode("not an image") },
    ]);
    expect(result.staged.map((f) => f.name)).toEqual(["a.dcm", "b.dcm", "c.dcm"]);
    expect(result.flagged.map((f) => f.name)).toEqual(["notes.txt"]);
    expect(result.summary).toBe("3 slices staged, 1 flagged as non-DICOM");
    expect(result.canSubmit).toBe(true);
  });

  it("cannot submit when every file is flagged", () => {
    const result = stageFiles([{ name: "x.txt", bytes: new Uint8Array(10) }]);
    expect(result.canSubmit).toBe(false);
    expect(result.flagged.length).toBe(1);
  });
});
