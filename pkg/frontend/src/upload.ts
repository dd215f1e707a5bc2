/** Client-side staging of a DICOM series before a run is submitted.
 *
 * Non-DICOM files are flagged inline and excluded; submission is possible
 * only when at least one valid slice is staged.
 */

const MAGIC_OFFSET = 128;
const MAGIC = [0x44, 0x49, 0x43, 0x4d]; // "DICM"

export interface StagedFile {
  name: string;
  size: number;
}

export interface StagingResult {
  staged: StagedFile[];
  flagged: StagedFile[];
  summary: string;
  canSubmit: boolean;
}

/** A Part-10 file has the DICM magic after a 128-byte preamble. */
export function isDicom(bytes: Uint8Array): boolean {
  if (bytes.length < MAGIC_OFFSET + MAGIC.length) return false;
  return MAGIC.every((b, i) => bytes[MAGIC_OFFSET + i] === b);
}

export function stageFiles(files: Array<{ name: string; bytes: Uint8Array }>): StagingResult {
  const staged: StagedFile[] = [];
  const flagged: StagedFile[] = [];
  for (const file of files) {
    const entry = { name: file.name, size: file.bytes.length };
    (isDicom(file.bytes) ? staged : flagged).push(entry);
  }
  const summary =
    files.length === 0
      ? "no files selected"
      : `${staged.length} slice${staged.length === 1 ? "" : "s"} staged` +
        (flagged.length > 0 ? `, ${flagged.length} flagged as non-DICOM` : "");
  return { staged, flagged, summary, canSubmit: staged.length > 0 };
}
