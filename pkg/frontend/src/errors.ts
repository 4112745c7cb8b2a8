/** Input CSV does not match the t,x1,...,xn,s_minus trajectory contract. */
export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

/** Input CSV has a valid header but no data rows. */
export class EmptyInput extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptyInput";
  }
}
