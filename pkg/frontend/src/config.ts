// Generated by scripts/make-config.mjs — do not edit by hand.
export const API_BASE: string = "http://127.0.0.1:8080";
